#ifndef OPLEARN_PGM_HPP
#define OPLEARN_PGM_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include "oplearn/image.hpp"

// Binary PGM ("P5", maxval 255) is the only image format read or written.
// Loading is byte-exact; saving rounds to nearest integer and clamps to
// [0,255]. Writes go through a temp file plus rename so readers never see a
// partial file.

namespace oplearn {

struct PgmError : std::runtime_error {
  enum class Kind {
    NotFound,           // file missing or unreadable
    UnsupportedFormat,  // magic is not "P5" (e.g. ASCII "P2")
    MalformedHeader,    // width/height/maxval not parseable
    UnsupportedMaxval,  // only maxval 255 is accepted
    TruncatedData,      // fewer than width*height pixel bytes
  };

  PgmError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

Image load_pgm(const std::filesystem::path& path);
void save_pgm(const Image& image, const std::filesystem::path& path);

}  // namespace oplearn

#endif  // OPLEARN_PGM_HPP
