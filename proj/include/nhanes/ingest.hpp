#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nhanes::ingest {

inline constexpr std::string_view kDefaultBaseUrl = "https://wwwn.cdc.gov/Nchs/Nhanes";

// A two-year continuous NHANES release, 1999-2000 through 2013-2014.
class CycleId {
 public:
  /// Throws UnsupportedCycle outside the eight supported cycles.
  explicit CycleId(int start_year);
  /// Accepts "1999-2000" style labels.
  static CycleId from_label(std::string_view label);
  static const std::array<CycleId, 8>& all();

  int start_year() const noexcept { return start_year_; }
  std::string label() const;
  /// File-name suffix: "" for 1999-2000, then "_B" ... "_H".
  std::string suffix() const;

  friend auto operator<=>(const CycleId&, const CycleId&) = default;

 private:
  CycleId() = default;
  int start_year_ = 1999;
};

enum class Category { demographics, examination, laboratory, questionnaire };
std::string_view to_string(Category c) noexcept;
Category category_from_string(std::string_view s);

struct ComponentRef {
  std::string base_name;  ///< uppercase stem without the cycle suffix, e.g. DEMO
  CycleId cycle;
  Category category;
};

std::string build_component_url(const ComponentRef& component,
                                 std::string_view base_url = kDefaultBaseUrl);

struct HttpResponse {
  long status = 0;
  std::string body;
};

// All network access goes through this interface. Implementations throw
// Error(NetworkError) when no HTTP response was obtained at all.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

class CurlTransport final : public Transport {
 public:
  explicit CurlTransport(std::chrono::seconds timeout = std::chrono::seconds(300));
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::seconds timeout_;
};

struct FetchOptions {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  /// Injected so tests do not actually sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
  /// Injected so manifests are reproducible in tests; defaults to the system clock.
  std::function<std::string()> clock;
};

struct CacheManifestEntry {
  std::string url;
  std::uint64_t bytes = 0;
  std::string sha256;
  std::string fetched_at;
};

std::string sha256_hex(std::string_view data);

/// NHANES_CACHE_DIR if set, otherwise $HOME/.cache/nhanes (or ./.nhanes-cache).
std::filesystem::path default_cache_root();

/// Cache location for a URL, whether or not it exists yet.
std::filesystem::path cache_path(const std::string& url, const std::filesystem::path& cache_root);
std::optional<std::filesystem::path> cached_file(const std::string& url,
                                                 const std::filesystem::path& cache_root);

/// Returns the cached copy of `url`, downloading it on a miss. Throws
/// NotFound on HTTP 404, EmptyBody on a zero-length body, NetworkError after
/// `max_attempts` failed attempts, CacheWriteError when the cache is not
/// writable.
std::filesystem::path fetch_cached(const std::string& url, const std::filesystem::path& cache_root,
                                   Transport& transport, const FetchOptions& options = {});

std::vector<CacheManifestEntry> read_cache_manifest(const std::filesystem::path& cache_root);

/// One component file family as listed in the component manifest; stems may
/// differ by cycle (e.g. the complete blood count file).
struct ComponentSpec {
  std::string name;
  Category category = Category::questionnaire;
  std::string stem;
  std::map<std::string, std::string> cycle_stems;  ///< cycle label -> stem override
  std::vector<std::string> cycles;                 ///< empty = all cycles

  bool available_in(const CycleId& cycle) const;
  std::string stem_for(const CycleId& cycle) const;
  ComponentRef ref(const CycleId& cycle) const;
};

std::vector<ComponentSpec> parse_component_manifest(std::string_view json_text);
std::vector<ComponentSpec> load_component_manifest(const std::filesystem::path& path);
std::filesystem::path default_component_manifest();

struct FetchedComponent {
  std::string component;
  ComponentRef ref;
  std::filesystem::path path;
};

struct Absence {
  std::string component;
  ComponentRef ref;
  std::string url;
  std::string reason;
};

struct CategoryFetch {
  std::vector<FetchedComponent> present;
  std::vector<Absence> absent;
};

/// Fetches every manifest component of `category` for each cycle. A 404 (or
/// a body that is not an XPORT file) is recorded as an absence; other
/// failures propagate.
CategoryFetch fetch_category(Category category, std::span<const CycleId> cycles,
                             std::span<const ComponentSpec> manifest,
                             const std::filesystem::path& cache_root, Transport& transport,
                             const FetchOptions& options = {},
                             std::string_view base_url = kDefaultBaseUrl);

}  // namespace nhanes::ingest
