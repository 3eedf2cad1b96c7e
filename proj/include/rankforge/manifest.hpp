#ifndef RANKFORGE_MANIFEST_HPP
#define RANKFORGE_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rankforge {

inline constexpr const char* kVersion = "1.0.0";

// Flat key-value record of one CLI run: command line, resolved configuration,
// input checksums, seed, version, duration. One `key=value` pair per line.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set_checksum(const std::string& key, const std::string& path);

  std::string to_string() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// FNV-1a over the file bytes, as a 16-digit hex string.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string file_checksum(const std::string& path);

}  // namespace rankforge

#endif  // RANKFORGE_MANIFEST_HPP
