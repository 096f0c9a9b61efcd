#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "ebsde/errors.hpp"

namespace ebsde::csv {

// All numeric CSV output goes through this: 15 significant digits, shortest
// spelling, locale independent.
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

inline std::string num(long x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }

class Writer {
  public:
    Writer(const std::string& path, const std::vector<std::string>& header)
        : out_(path), n_cols_(header.size()) {
        if (!out_) throw Error("cannot open for writing: " + path);
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        if (cells.size() != n_cols_) {
            throw Error("csv row width mismatch");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
    std::size_t n_cols_;
};

}  // namespace ebsde::csv
