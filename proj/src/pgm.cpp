#include "oplearn/pgm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

namespace oplearn {
namespace {

// Reads one whitespace/comment-separated PGM header token.
bool next_header_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {  // comment runs to end of line
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) {
        in.unget();
        return true;
      }
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return !tok.empty();
}

long parse_positive(const std::string& tok) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    return -1;
  try {
    return std::stol(tok);
  } catch (const std::exception&) {
    return -1;
  }
}

}  // namespace

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw PgmError(PgmError::Kind::NotFound,
                   "cannot open '" + path.string() + "'");

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P')
    throw PgmError(PgmError::Kind::MalformedHeader,
                   "'" + path.string() + "': missing PGM magic");
  if (magic[1] != '5')
    throw PgmError(PgmError::Kind::UnsupportedFormat,
                   "'" + path.string() + "': only binary PGM (P5) is supported");

  std::string tok;
  long dims[3];  // width, height, maxval
  for (long& d : dims) {
    if (!next_header_token(in, tok) || (d = parse_positive(tok)) <= 0)
      throw PgmError(PgmError::Kind::MalformedHeader,
                     "'" + path.string() + "': malformed PGM header");
  }
  if (dims[2] != 255)
    throw PgmError(PgmError::Kind::UnsupportedMaxval,
                   "'" + path.string() + "': maxval must be 255, got " +
                       std::to_string(dims[2]));
  in.get();  // single whitespace byte after maxval

  const long width = dims[0], height = dims[1];
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw PgmError(PgmError::Kind::TruncatedData,
                   "'" + path.string() + "': truncated pixel data");

  Image img(height, width);
  for (std::size_t i = 0; i < bytes.size(); ++i)
    img.data()[i] = static_cast<double>(bytes[i]);
  return img;
}

void save_pgm(const Image& image, const std::filesystem::path& path) {
  if (image.rows() < 1 || image.cols() < 1)
    throw std::invalid_argument("save_pgm: empty image");

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("save_pgm: cannot write '" + tmp.string() + "'");
    out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
    std::vector<unsigned char> bytes(static_cast<std::size_t>(image.size()));
    for (Eigen::Index i = 0; i < image.size(); ++i) {
      const double v = std::round(image.data()[i]);
      bytes[static_cast<std::size_t>(i)] =
          static_cast<unsigned char>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw std::runtime_error("save_pgm: write failed for '" + tmp.string() +
                               "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("save_pgm: cannot rename to '" + path.string() +
                             "': " + ec.message());
  }
}

}  // namespace oplearn
