#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stylemem/error.hpp"

namespace stylemem {

// Comma-separated metrics files with a header row. Numeric formatting is
// pinned so identical runs produce identical bytes.

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

class CsvWriter {
public:
    // `comment` (when given) becomes a leading '#' line above the header row.
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::string& comment = "")
        : out_(path, std::ios::trunc) {
        if (!out_) fail(ErrorCode::io_failure, "cannot write " + path.string());
        if (!comment.empty()) write_comment(comment);
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    // free-form comment line, used for run headers
    void write_comment(const std::string& text) { out_ << "# " << text << '\n'; }

private:
    std::ofstream out_;
};

}  // namespace stylemem
