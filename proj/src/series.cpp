#include "qnls/series.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>

#include "qnls/errors.hpp"

namespace qnls {

Channel& DiagnosticSeries::channel(const std::string& name) {
    for (auto& c : channels_)
        if (c.name == name) return c;
    channels_.push_back({name, {}, {}});
    return channels_.back();
}

const Channel& DiagnosticSeries::at(const std::string& name) const {
    for (auto& c : channels_)
        if (c.name == name) return c;
    throw ValidationError("no diagnostic channel named " + name);
}

bool DiagnosticSeries::has(const std::string& name) const {
    return std::any_of(channels_.begin(), channels_.end(), [&](const Channel& c) { return c.name == name; });
}

void DiagnosticSeries::push(const std::string& name, double t, double v) {
    Channel& c = channel(name);
    c.times.push_back(t);
    c.values.push_back(v);
}

void DiagnosticSeries::merge(const DiagnosticSeries& other, const std::string& prefix) {
    for (const auto& c : other.channels_) {
        Channel& mine = channel(prefix + c.name);
        mine.times.insert(mine.times.end(), c.times.begin(), c.times.end());
        mine.values.insert(mine.values.end(), c.values.begin(), c.values.end());
    }
    for (auto it = other.metadata.begin(); it != other.metadata.end(); ++it) metadata[prefix + it.key()] = it.value();
}

namespace {

std::vector<double> all_times(const std::vector<Channel>& channels) {
    std::set<double> t;
    for (const auto& c : channels) t.insert(c.times.begin(), c.times.end());
    return {t.begin(), t.end()};
}

}  // namespace

void DiagnosticSeries::write_csv(std::ostream& out) const {
    for (auto it = metadata.begin(); it != metadata.end(); ++it) out << "# " << it.key() << "=" << it.value().dump() << "\n";
    out << "time";
    for (const auto& c : channels_) out << "," << c.name;
    out << "\n" << std::setprecision(17);
    for (double t : all_times(channels_)) {
        out << t;
        for (const auto& c : channels_) {
            out << ",";
            auto pos = std::find(c.times.begin(), c.times.end(), t);
            if (pos != c.times.end()) out << c.values[pos - c.times.begin()];
        }
        out << "\n";
    }
}

void DiagnosticSeries::write_ndjson(std::ostream& out) const {
    for (double t : all_times(channels_)) {
        nlohmann::json rec;
        rec["time"] = t;
        for (const auto& c : channels_) {
            auto pos = std::find(c.times.begin(), c.times.end(), t);
            if (pos != c.times.end()) rec[c.name] = c.values[pos - c.times.begin()];
        }
        out << rec.dump() << "\n";
    }
}

void EstimateLedger::add(const std::string& label, const std::string& side, double value) {
    terms.push_back({label, side, value});
}

double EstimateLedger::value(const std::string& label) const {
    for (const auto& t : terms)
        if (t.label == label) return t.value;
    throw ValidationError("ledger " + name + " has no term " + label);
}

nlohmann::json EstimateLedger::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["measured_constant"] = measured_constant;
    j["identity_residual"] = identity_residual;
    j["advisory"] = advisory;
    j["metadata"] = metadata;
    for (const auto& t : terms) j["terms"].push_back({{"label", t.label}, {"side", t.side}, {"value", t.value}});
    return j;
}

void EstimateLedger::write_csv(std::ostream& out) const {
    out << "label,side,value\n" << std::setprecision(17);
    for (const auto& t : terms) out << t.label << "," << t.side << "," << t.value << "\n";
    out << "lhs,summary," << lhs << "\nrhs,summary," << rhs << "\nmeasured_constant,summary," << measured_constant
        << "\nidentity_residual,summary," << identity_residual << "\n";
}

}  // namespace qnls
