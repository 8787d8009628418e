#pragma once

// Output writers.  CSV files are plain comma-separated tables with a header
// row, '.' decimal separator, and scientific notation carrying 17
// significant digits, so values survive a round trip through text exactly.
// JSON reports are written through the same atomic path: stream to a
// temporary file in the target directory, then rename over the final name,
// so readers never observe a half-written file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vshock/errors.hpp"
#include "vshock/field.hpp"

namespace vshock {

// 17 significant digits: lossless text round trip for doubles.
inline std::string format_sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

inline void write_text_atomic(const std::filesystem::path& file,
                              const std::string& content) {
  std::filesystem::path dir = file.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw io_error("cannot create output directory",
                     {{"dir", dir.string()}, {"detail", ec.message()}});
  }
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open output file", {{"file", tmp.string()}});
    out << content;
    if (!out) throw io_error("failed writing output file", {{"file", tmp.string()}});
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec)
    throw io_error("cannot move output file into place",
                   {{"file", file.string()}, {"detail", ec.message()}});
}

inline void write_json_atomic(const std::filesystem::path& file,
                              const nlohmann::json& doc) {
  write_text_atomic(file, doc.dump(2) + "\n");
}

// One row per node: r, z, value.
inline std::string gridded_to_csv(const GriddedField& f) {
  std::string out = "r,z,value\n";
  out.reserve(f.values.size() * 64 + 16);
  for (std::size_t j = 0; j < f.grid.n_r; ++j) {
    double r = f.grid.r(j);
    for (std::size_t i = 0; i < f.grid.n_z; ++i) {
      out += format_sci(r);
      out += ',';
      out += format_sci(f.grid.z(i));
      out += ',';
      out += format_sci(f.at(j, i));
      out += '\n';
    }
  }
  return out;
}

// Generic small table: header + rows of doubles.
inline std::string table_to_csv(const std::vector<std::string>& header,
                                const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    out += header[c];
    out += (c + 1 < header.size()) ? ',' : '\n';
  }
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw validation_error("csv row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += format_sci(row[c]);
      out += (c + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

inline nlohmann::json grid_to_json(const Grid2D& g) {
  return {{"r_max", g.r_max}, {"z_min", g.z_min}, {"z_max", g.z_max},
          {"n_r", g.n_r},     {"n_z", g.n_z}};
}

inline nlohmann::json error_to_json(const error& e) {
  nlohmann::json ctx = nlohmann::json::object();
  for (const auto& [k, v] : e.context()) ctx[k] = v;
  return {{"error",
           {{"type", to_string(e.kind())}, {"message", e.message()},
            {"context", ctx}}}};
}

}  // namespace vshock
