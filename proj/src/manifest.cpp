#include "manifest.hpp"

#include "stablesep/error.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace stablesep::cli::detail {

std::string git_blob_hash(std::string_view content) {
  const std::string prefix = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error(ErrorKind::InvalidArgument, "cannot allocate digest context");
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, prefix.data(), prefix.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& content) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  return path;
}

std::string render_manifest(const std::string& config_echo, const std::string& status,
                            const std::vector<ManifestEntry>& files,
                            const std::vector<std::string>& completed_cells) {
  std::ostringstream os;
  os << "# config\n" << config_echo << "# status\nstatus = " << status << '\n' << "# files\n";
  for (const auto& f : files) os << f.hash << '\t' << f.file << '\n';
  if (status != "complete") {
    os << "# completed cells\n";
    for (const auto& c : completed_cells) os << c << '\n';
  }
  return os.str();
}

}  // namespace stablesep::cli::detail
