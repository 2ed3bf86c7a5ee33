#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace drljrm {

// Dense row-major matrix of doubles. Small helper, no linear algebra.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return a.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    double sum() const {
        double s = 0.0;
        for (double v : a) s += v;
        return s;
    }
};

inline double dbm_to_watts(double dbm) {
    if (!std::isfinite(dbm)) throw std::invalid_argument("dbm_to_watts: non-finite input");
    return std::pow(10.0, dbm / 10.0) * 1e-3;
}

// Formats a double so that it round-trips exactly through text.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Flat "key = value" config file with '#' comments and blank lines.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Lookup helpers; throw std::invalid_argument on missing key or bad number.
double kv_get_double(const std::map<std::string, std::string>& kv, const std::string& key, double fallback);
long long kv_get_int(const std::map<std::string, std::string>& kv, const std::string& key, long long fallback);
std::string kv_get_string(const std::map<std::string, std::string>& kv, const std::string& key,
                          const std::string& fallback);
bool kv_has(const std::map<std::string, std::string>& kv, const std::string& key);

// Verbosity from DRLJRM_LOG (0 = quiet, 1 = progress, 2 = chatty). Cached.
int log_level();

}  // namespace drljrm
