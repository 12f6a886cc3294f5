#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace rbam {

/// Shortest-to-read decimal that still round-trips: 17 significant digits.
std::string format_real(double value);

/// Comma-separated file with a mandatory header line. Throws on I/O failure.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void write(const std::vector<std::string>& fields);

private:
    std::string path_;
    std::ofstream out_;
    std::size_t columns_;
};

/// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& path);

/// Writes text to a file, replacing it. Throws on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rbam
