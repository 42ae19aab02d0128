#ifndef SLICEHUB_ZIP_HPP
#define SLICEHUB_ZIP_HPP

#include <string>
#include <vector>

namespace slicehub {

struct ZipEntry {
  std::string name;
  std::string data;
};

/// Uncompressed (stored) archive with fixed timestamps, so identical inputs
/// give identical bytes.
std::string write_zip(const std::vector<ZipEntry>& entries);

/// Reads stored or deflated entries via the central directory. Throws
/// InvalidArgument on anything else.
std::vector<ZipEntry> read_zip(const std::string& archive);

}  // namespace slicehub

#endif  // SLICEHUB_ZIP_HPP
