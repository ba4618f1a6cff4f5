#pragma once

// Plain-CSV output with locale-independent, byte-stable number formatting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace airlink::workbench {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        out_ << header << "\n";
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << fmt_num(values[i]);
        }
        out_ << "\n";
    }
    // leading string cell (e.g. a system name) followed by numeric cells
    void row(const std::string& label, const std::vector<double>& values) {
        out_ << label;
        for (const double v : values) out_ << "," << fmt_num(v);
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

}  // namespace airlink::workbench
