#include "qnls/hashing.hpp"

#include <openssl/sha.h>

#include <fstream>
#include <iterator>

#include "qnls/errors.hpp"

namespace qnls {

std::string sha1_hex(std::string_view bytes) {
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned char c : digest) {
        out += hex[c >> 4];
        out += hex[c & 15];
    }
    return out;
}

std::string git_blob_hash(std::string_view bytes) {
    std::string payload = "blob " + std::to_string(bytes.size());
    payload.push_back('\0');
    payload.append(bytes);
    return sha1_hex(payload);
}

std::string git_blob_hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot hash missing file " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return git_blob_hash(bytes);
}

}  // namespace qnls
