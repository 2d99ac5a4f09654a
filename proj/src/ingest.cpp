#include "nhanes/ingest.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include <curl/curl.h>
#include <openssl/evp.h>

#include <json.hpp>

#include "nhanes/csv.hpp"
#include "nhanes/error.hpp"
#include "nhanes/xport.hpp"

namespace nhanes::ingest {
namespace {

bool is_supported_start(int year) { return year >= 1999 && year <= 2013 && year % 2 == 1; }

// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorCode::CacheWriteError, "cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      fail(ErrorCode::CacheWriteError, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t curl_write(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

void append_manifest(const std::filesystem::path& cache_root, const CacheManifestEntry& entry) {
  FileLock lock(cache_root / "manifest.lock");
  nlohmann::ordered_json line;
  line["url"] = entry.url;
  line["bytes"] = entry.bytes;
  line["sha256"] = entry.sha256;
  line["fetched_at"] = entry.fetched_at;
  std::ofstream out(cache_root / "manifest.jsonl", std::ios::app | std::ios::binary);
  if (!out) fail(ErrorCode::CacheWriteError, "cannot append to cache manifest");
  out << line.dump() << '\n';
  if (!out) fail(ErrorCode::CacheWriteError, "cannot append to cache manifest");
}

}  // namespace

CycleId::CycleId(int start_year) : start_year_(start_year) {
  if (!is_supported_start(start_year)) {
    fail(ErrorCode::UnsupportedCycle,
         "cycle starting " + std::to_string(start_year) +
             " is not supported (continuous NHANES 1999-2000 through 2013-2014 only)");
  }
}

CycleId CycleId::from_label(std::string_view label) {
  if (label.size() != 9 || label[4] != '-') {
    fail(ErrorCode::UnsupportedCycle, "bad cycle label '" + std::string(label) + "'");
  }
  auto first = parse_number(label.substr(0, 4));
  auto second = parse_number(label.substr(5, 4));
  if (!first || !second || *second != *first + 1) {
    fail(ErrorCode::UnsupportedCycle, "bad cycle label '" + std::string(label) + "'");
  }
  return CycleId(static_cast<int>(*first));
}

const std::array<CycleId, 8>& CycleId::all() {
  static const std::array<CycleId, 8> cycles{CycleId(1999), CycleId(2001), CycleId(2003),
                                             CycleId(2005), CycleId(2007), CycleId(2009),
                                             CycleId(2011), CycleId(2013)};
  return cycles;
}

std::string CycleId::label() const {
  return std::to_string(start_year_) + "-" + std::to_string(start_year_ + 1);
}

std::string CycleId::suffix() const {
  if (start_year_ == 1999) return "";
  const char letter = static_cast<char>('A' + (start_year_ - 1999) / 2);
  return std::string("_") + letter;
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::demographics: return "demographics";
    case Category::examination: return "examination";
    case Category::laboratory: return "laboratory";
    case Category::questionnaire: return "questionnaire";
  }
  return "questionnaire";
}

Category category_from_string(std::string_view s) {
  if (s == "demographics") return Category::demographics;
  if (s == "examination") return Category::examination;
  if (s == "laboratory") return Category::laboratory;
  if (s == "questionnaire") return Category::questionnaire;
  fail(ErrorCode::InvalidArgument, "unknown category '" + std::string(s) + "'");
}

std::string build_component_url(const ComponentRef& component, std::string_view base_url) {
  std::string base(base_url);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/" + component.cycle.label() + "/" + component.base_name +
         component.cycle.suffix() + ".XPT";
}

CurlTransport::CurlTransport(std::chrono::seconds timeout) : timeout_(timeout) {
  static std::once_flag init;
  std::call_once(init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::get(const std::string& url) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
  if (!curl) fail(ErrorCode::NetworkError, "curl_easy_init failed");
  HttpResponse response;
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_PROTOCOLS, static_cast<long>(CURLPROTO_HTTPS));
  curl_easy_setopt(curl.get(), CURLOPT_REDIR_PROTOCOLS, static_cast<long>(CURLPROTO_HTTPS));
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, static_cast<long>(timeout_.count()));
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &curl_write);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &response.body);
  curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "nhanes-multiview/0.1");
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) {
    fail(ErrorCode::NetworkError, url + ": " + curl_easy_strerror(rc));
  }
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &response.status);
  return response;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::filesystem::path default_cache_root() {
  if (const char* env = std::getenv("NHANES_CACHE_DIR"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "nhanes";
  }
  return ".nhanes-cache";
}

std::filesystem::path cache_path(const std::string& url, const std::filesystem::path& cache_root) {
  return cache_root / sha256_hex(url);
}

std::optional<std::filesystem::path> cached_file(const std::string& url,
                                                 const std::filesystem::path& cache_root) {
  auto path = cache_path(url, cache_root);
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec) && std::filesystem::file_size(path, ec) > 0) {
    return path;
  }
  return std::nullopt;
}

std::filesystem::path fetch_cached(const std::string& url, const std::filesystem::path& cache_root,
                                   Transport& transport, const FetchOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(cache_root, ec);
  if (ec) fail(ErrorCode::CacheWriteError, "cannot create " + cache_root.string() + ": " + ec.message());

  const auto target = cache_path(url, cache_root);
  auto lock_path = target;
  lock_path += ".lock";
  FileLock lock(lock_path);
  if (auto hit = cached_file(url, cache_root)) return *hit;

  const int attempts = std::max(1, options.max_attempts);
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = options.initial_backoff * (1 << (attempt - 2));
      if (options.sleep) {
        options.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
    HttpResponse response;
    try {
      response = transport.get(url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NetworkError) throw;
      last_error = e.what();
      continue;
    }
    if (response.status == 404) fail(ErrorCode::NotFound, url + " returned HTTP 404");
    if (response.status >= 500 || response.status == 429 || response.status == 408) {
      last_error = url + " returned HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status < 200 || response.status >= 300) {
      fail(ErrorCode::NetworkError, url + " returned HTTP " + std::to_string(response.status));
    }
    if (response.body.empty()) fail(ErrorCode::EmptyBody, url + " returned an empty body");

    try {
      write_file_atomic(target, response.body);
    } catch (const Error& e) {
      fail(ErrorCode::CacheWriteError, e.what());
    }
    CacheManifestEntry entry{url, response.body.size(), sha256_hex(response.body),
                             options.clock ? options.clock() : utc_now()};
    append_manifest(cache_root, entry);
    return target;
  }
  fail(ErrorCode::NetworkError,
       "giving up after " + std::to_string(attempts) + " attempts: " + last_error);
}

std::vector<CacheManifestEntry> read_cache_manifest(const std::filesystem::path& cache_root) {
  std::vector<CacheManifestEntry> entries;
  std::ifstream in(cache_root / "manifest.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    entries.push_back({j.at("url").get<std::string>(), j.at("bytes").get<std::uint64_t>(),
                       j.at("sha256").get<std::string>(), j.at("fetched_at").get<std::string>()});
  }
  return entries;
}

bool ComponentSpec::available_in(const CycleId& cycle) const {
  if (cycles.empty()) return true;
  return std::find(cycles.begin(), cycles.end(), cycle.label()) != cycles.end();
}

std::string ComponentSpec::stem_for(const CycleId& cycle) const {
  auto it = cycle_stems.find(cycle.label());
  return it == cycle_stems.end() ? stem : it->second;
}

ComponentRef ComponentSpec::ref(const CycleId& cycle) const {
  return ComponentRef{stem_for(cycle), cycle, category};
}

std::vector<ComponentSpec> parse_component_manifest(std::string_view json_text) {
  std::vector<ComponentSpec> out;
  try {
    auto j = nlohmann::json::parse(json_text);
    for (const auto& c : j.at("components")) {
      ComponentSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.category = category_from_string(c.at("category").get<std::string>());
      spec.stem = c.at("stem").get<std::string>();
      if (c.contains("cycle_stems")) {
        for (const auto& [label, stem] : c["cycle_stems"].items()) {
          CycleId::from_label(label);
          spec.cycle_stems[label] = stem.get<std::string>();
        }
      }
      if (c.contains("cycles")) {
        for (const auto& label : c["cycles"]) {
          spec.cycles.push_back(CycleId::from_label(label.get<std::string>()).label());
        }
      }
      auto check_stem = [&](const std::string& s) {
        bool ok = !s.empty() && s.size() <= 8;
        for (char ch : s) ok = ok && ((ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_');
        if (!ok) fail(ErrorCode::InvalidConfig, "component stem '" + s + "' must be uppercase, <= 8 chars");
      };
      check_stem(spec.stem);
      for (const auto& [label, s] : spec.cycle_stems) check_stem(s);
      out.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("bad component manifest: ") + e.what());
  }
  return out;
}

std::vector<ComponentSpec> load_component_manifest(const std::filesystem::path& path) {
  return parse_component_manifest(read_file(path));
}

std::filesystem::path default_component_manifest() {
  return std::filesystem::path(NHANES_DATA_DIR) / "components.json";
}

CategoryFetch fetch_category(Category category, std::span<const CycleId> cycles,
                             std::span<const ComponentSpec> manifest,
                             const std::filesystem::path& cache_root, Transport& transport,
                             const FetchOptions& options, std::string_view base_url) {
  CategoryFetch result;
  for (const auto& cycle : cycles) {
    for (const auto& spec : manifest) {
      if (spec.category != category || !spec.available_in(cycle)) continue;
      const ComponentRef ref = spec.ref(cycle);
      const std::string url = build_component_url(ref, base_url);
      try {
        auto path = fetch_cached(url, cache_root, transport, options);
        std::ifstream in(path, std::ios::binary);
        std::string head(xport::kRecordSize, '\0');
        in.read(head.data(), static_cast<std::streamsize>(head.size()));
        head.resize(static_cast<std::size_t>(in.gcount()));
        if (!xport::looks_like_xport(head)) {
          result.absent.push_back({spec.name, ref, url, "body is not an XPORT file"});
          continue;
        }
        result.present.push_back({spec.name, ref, std::move(path)});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotFound) throw;
        result.absent.push_back({spec.name, ref, url, "HTTP 404"});
      }
    }
  }
  return result;
}

}  // namespace nhanes::ingest
