// cache.hpp: on-disk spectrum cache keyed by a content hash
//
// Entries use the spectrum dump format from fockspin.hpp. Writers go through
// a temporary file and an atomic rename, so concurrent readers only ever see
// complete entries.

#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "bsshift/errors.hpp"
#include "bsshift/fockspin.hpp"

namespace bsshift {

/// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class SpectrumCache {
public:
    explicit SpectrumCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
    }

    /// Key for the spectrum of H(delta_e, U) on n_max, either full (sector 0) or one parity sector.
    [[nodiscard]] static std::string key(double delta_e, double coupling_u, int n_max, int sector) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "spin-boson;dE=%a;U=%a;n_max=%d;sector=%d", delta_e, coupling_u, n_max, sector);
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(buf)));
        return hex;
    }

    [[nodiscard]] std::optional<SpectrumDump> load(const std::string& key) const {
        std::ifstream in(path_for(key), std::ios::binary);
        if (!in) return std::nullopt;
        try {
            return read_spectrum_dump(in);
        } catch (const IoError&) {
            return std::nullopt;
        }
    }

    void store(const std::string& key, const Eigen::VectorXd& eigenvalues, const std::vector<int>& parity) const {
        static std::atomic<unsigned> counter{0};
        std::ostringstream tmp_name;
        tmp_name << key << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++;
        const auto tmp = dir_ / tmp_name.str();
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write cache entry " + tmp.string());
            write_spectrum_dump(out, eigenvalues, parity);
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path_for(key), ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
            throw IoError("cannot publish cache entry " + key);
        }
    }

    [[nodiscard]] const std::filesystem::path& directory() const { return dir_; }

private:
    [[nodiscard]] std::filesystem::path path_for(const std::string& key) const { return dir_ / (key + ".spectrum"); }

    std::filesystem::path dir_;
};

} // namespace bsshift
