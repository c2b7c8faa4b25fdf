#pragma once

#include <openssl/sha.h>

#include <array>
#include <string>

#include <json.hpp>

#include "lakevortex/depth.hpp"

namespace lakevortex {

using Fingerprint = std::array<unsigned char, 32>;

inline Fingerprint sha256(const std::string& data) {
    Fingerprint out{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
    return out;
}

/// Canonical JSON of a depth block: alphabetically ordered keys, compact
/// separators. The cache fingerprint hashes exactly this string.
inline std::string canonical_depth_json(const DepthField& depth) {
    nlohmann::json j;
    j["family"] = depth.family_name();
    j["gamma"] = depth.gamma();
    j["params"] = depth.params();
    return j.dump(); // nlohmann::json orders object keys alphabetically
}

inline Fingerprint depth_fingerprint(const DepthField& depth) {
    return sha256(canonical_depth_json(depth));
}

inline std::string to_hex(const Fingerprint& fp) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (unsigned char c : fp) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

} // namespace lakevortex
