#pragma once

// Text embedding files: a `<row_count> <d>` header, then one
// `<code> <v1> ... <vd>` line per product, values at 9 significant digits.
// Reading back can flip neighbor pairs whose cosines differ by less than
// about 1e-8; everything else ranks identically.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>

#include "prodembed/basket_ingest.hpp"
#include "prodembed/embedding_core.hpp"
#include "prodembed/error.hpp"

namespace prodembed {

inline constexpr int kEmbeddingDigits = 9;

inline void write_embedding(std::ostream& out, const EmbeddingMatrix& t) {
  out << t.rows() << ' ' << t.dim << '\n';
  char buf[64];
  std::string line;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    line = t.codes[r];
    for (double x : t.row(r)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, kEmbeddingDigits);
      if (ec != std::errc{}) throw ConsistencyError("failed to format embedding value");
      line += ' ';
      line.append(buf, end);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("failed writing embedding stream");
}

inline void write_embedding_file(const std::filesystem::path& path, const EmbeddingMatrix& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path.string());
  write_embedding(out, t);
  out.close();
  if (!out) throw IoError("failed writing output file: " + path.string());
}

inline EmbeddingMatrix read_embedding(std::istream& in) {
  if (!in) throw IoError("embedding stream is not readable");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw MalformedInputError("missing `<row_count> <d>` header", 1);
  ++line_no;
  const auto header = detail::split_whitespace(line);
  std::size_t rows = 0;
  std::size_t dim = 0;
  auto parse_size = [&](std::string_view s, std::size_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || p != s.data() + s.size()) throw MalformedInputError("bad header value", line_no);
  };
  if (header.size() != 2) throw MalformedInputError("header must be `<row_count> <d>`", line_no);
  parse_size(header[0], rows);
  parse_size(header[1], dim);
  if (dim == 0) throw MalformedInputError("dimension must be positive", line_no);

  EmbeddingMatrix t;
  t.dim = dim;
  t.values.reserve(rows * dim);
  Vocabulary seen;
  while (t.rows() < rows && std::getline(in, line)) {
    ++line_no;
    const auto tokens = detail::split_whitespace(line);
    if (tokens.size() != dim + 1) {
      throw MalformedInputError("expected code plus " + std::to_string(dim) + " values", line_no);
    }
    const auto before = seen.size();
    seen.intern(tokens[0]);
    if (seen.size() == before) throw MalformedInputError("duplicate code " + std::string(tokens[0]), line_no);
    for (std::size_t j = 1; j <= dim; ++j) {
      double x = 0.0;
      auto [p, ec] = std::from_chars(tokens[j].data(), tokens[j].data() + tokens[j].size(), x);
      if (ec != std::errc{} || p != tokens[j].data() + tokens[j].size() || !std::isfinite(x)) {
        throw MalformedInputError("bad value `" + std::string(tokens[j]) + "`", line_no);
      }
      t.values.push_back(x);
    }
    t.nodes.push_back(product_at(t.nodes.size()));
    t.codes.emplace_back(tokens[0]);
  }
  if (t.rows() != rows) {
    throw MalformedInputError("header declares " + std::to_string(rows) + " rows, found " +
                                  std::to_string(t.rows()),
                              line_no);
  }
  return t;
}

inline EmbeddingMatrix read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  return read_embedding(in);
}

}  // namespace prodembed
