#include "vpc/digest.hpp"

#include <stdexcept>

#include <fmt/core.h>
#include <openssl/evp.h>

#include "vpc/io_formats.hpp"

namespace vpc
{
std::string sha256_hex(std::span<const char> bytes)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
  {
    throw std::runtime_error("sha256: digest computation failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i)
  {
    hex += fmt::format("{:02x}", digest[i]);
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path)
{
  return sha256_hex(read_binary_file(path));
}

}  // namespace vpc
