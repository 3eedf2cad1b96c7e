#include "rankforge/manifest.hpp"

#include <fstream>
#include <sstream>

#include "rankforge/error.hpp"
#include "rankforge/model_io.hpp"

namespace rankforge {

void Manifest::set(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) {
  entries_.emplace_back(key, model_io::format_double(value));
}

void Manifest::set(const std::string& key, std::int64_t value) {
  entries_.emplace_back(key, std::to_string(value));
}

void Manifest::set_checksum(const std::string& key, const std::string& path) {
  entries_.emplace_back(key, file_checksum(path));
}

std::string Manifest::to_string() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  return out.str();
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open manifest path '" + path + "'");
  out << to_string();
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for checksumming");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace rankforge
