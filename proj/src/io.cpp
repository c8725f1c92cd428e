#include "rbeam/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbeam::io {

namespace {

int read_pnm_token(std::istream& in) {
  // skips whitespace and '#' comments
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  return value;
}

}  // namespace

RMatrix load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("'" + path + "' is not an 8-bit PGM");
  const int width = read_pnm_token(in);
  const int height = read_pnm_token(in);
  const int maxval = read_pnm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("'" + path + "': unsupported PGM header");

  RMatrix img(height, width);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (!in) throw std::runtime_error("'" + path + "': truncated PGM payload");
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c)
        img(r, c) = buf[static_cast<std::size_t>(r) * width + c] / double(maxval);
  } else {
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        const int v = read_pnm_token(in);
        if (v < 0) throw std::runtime_error("'" + path + "': truncated PGM payload");
        img(r, c) = v / double(maxval);
      }
  }
  return img;
}

void save_pgm(const RMatrix& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const double lo = image.minCoeff();
  const double hi = image.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < image.cols(); ++c) {
      const double v = (image(r, c) - lo) / span;
      out.put(static_cast<char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
    }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

RMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("'" + path + "': ragged CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("'" + path + "': empty CSV");
  RMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void save_csv(const RMatrix& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c) {
      if (c) out << ",";
      out << format_double(values(r, c));
    }
    out << "\n";
  }
}

void save_csv(const RVector& values, const std::string& path) {
  save_csv(RMatrix(values), path);
}

void save_csv(const CVector& values, const std::string& path) {
  RMatrix two(values.size(), 2);
  two.col(0) = values.real();
  two.col(1) = values.imag();
  save_csv(two, path);
}

CVector load_complex_csv(const std::string& path) {
  const RMatrix two = load_csv(path);
  if (two.cols() != 2) throw std::runtime_error("'" + path + "': expected re,im columns");
  CVector v(two.rows());
  for (int i = 0; i < two.rows(); ++i) v[i] = Complex(two(i, 0), two(i, 1));
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
}

}  // namespace rbeam::io
