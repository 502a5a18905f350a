#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace qnls {

struct Channel {
    std::string name;
    std::vector<double> times;
    std::vector<double> values;
};

// Named time series sharing the trajectory's checkpoint times.
class DiagnosticSeries {
public:
    Channel& channel(const std::string& name);  // created on first use, insertion order kept
    const Channel& at(const std::string& name) const;
    bool has(const std::string& name) const;
    void push(const std::string& name, double t, double v);
    const std::vector<Channel>& channels() const { return channels_; }
    void merge(const DiagnosticSeries& other, const std::string& prefix = "");

    nlohmann::json metadata = nlohmann::json::object();

    // CSV: header row "time,<channel>..." preceded by "# key=value" metadata lines.
    void write_csv(std::ostream& out) const;
    // NDJSON: one object per distinct time, {"time": t, "<channel>": v, ...}.
    void write_ndjson(std::ostream& out) const;

private:
    std::vector<Channel> channels_;
};

struct LedgerTerm {
    std::string label;
    std::string side;  // "lhs", "rhs" or "identity"
    double value = 0.0;
};

// Per-term values of one estimate, with the measured constant LHS/RHS.
struct EstimateLedger {
    std::string name;
    std::vector<LedgerTerm> terms;
    double lhs = 0.0;
    double rhs = 0.0;
    double measured_constant = 0.0;
    double identity_residual = 0.0;
    bool advisory = false;  // boundary mass too large to trust the entries
    nlohmann::json metadata = nlohmann::json::object();

    void add(const std::string& label, const std::string& side, double value);
    double value(const std::string& label) const;
    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

}  // namespace qnls
