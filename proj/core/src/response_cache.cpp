#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qe/error.hpp"
#include "qe/judge.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

class FileDescriptor {
 public:
  explicit FileDescriptor(int fd) : fd_(fd) {}
  ~FileDescriptor() {
    if (fd_ >= 0) ::close(fd_);
  }
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  int get() const noexcept { return fd_; }

 private:
  int fd_;
};

void append_line(const std::filesystem::path& path, const std::string& line) {
  FileDescriptor fd(::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (fd.get() < 0) throw Error("cannot open cache " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd.get(), LOCK_EX) != 0) throw Error("cannot lock cache " + path.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd.get(), line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::flock(fd.get(), LOCK_UN);
      throw Error("cannot append to cache " + path.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  ::flock(fd.get(), LOCK_UN);
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) return;  // created on first store
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    try {
      const auto entry = nlohmann::json::parse(line);
      entries_[entry.at("request_hash").get<std::string>()] = entry.at("text").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      ++skipped_lines_;  // e.g. a torn final line after a crash
    }
  }
}

std::optional<std::string> ResponseCache::lookup(const std::string& hash) const {
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(hash); it != entries_.end()) return it->second;
  return std::nullopt;
}

void ResponseCache::store(const std::string& hash, const std::string& text, const std::string& model_name) {
  std::lock_guard lock(mutex_);
  entries_[hash] = text;
  if (!path_) return;
  const nlohmann::json entry = {
      {"request_hash", hash}, {"text", text}, {"model_name", model_name}, {"timestamp", detail::utc_timestamp()}};
  append_line(*path_, entry.dump() + "\n");
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace qe
