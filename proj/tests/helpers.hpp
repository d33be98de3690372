// Shared test utilities: quick series construction and scratch directories.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epiphase/series.hpp"

namespace testutil {

inline epiphase::DailySeries series_of(const std::vector<double>& v, int start_day = 1) {
    epiphase::DailySeries s;
    s.start_day = start_day;
    s.label = "y";
    for (double x : v) s.values.push_back(x);
    return s;
}

// Fresh scratch directory under the system temp dir, wiped on construction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("epiphase_" + tag);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace testutil
