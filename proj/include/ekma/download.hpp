#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ekma {

inline constexpr const char* kAirDataBaseUrl = "https://aqs.epa.gov/aqsweb/airdata";

struct DownloadOptions {
  // scheme://host[:port]/path prefix; archives live at <base_url>/hourly_<code>_<year>.zip
  std::string base_url = kAirDataBaseUrl;
  int timeout_seconds = 300;
};

std::string airdata_archive_name(int parameter_code, int year);
std::string airdata_url(int parameter_code, int year, std::string_view base_url = kAirDataBaseUrl);

// Fetches and unpacks one hourly archive into `dest`, returning the CSV
// path. Returns immediately when the CSV already exists. Throws HttpError
// (retryable, carrying the status) on HTTP failure and FormatError when the
// payload is not a ZIP archive holding exactly one CSV.
std::filesystem::path download_airdata(int parameter_code, int year, const std::filesystem::path& dest,
                                       const DownloadOptions& options = {});

// Extracts the single CSV member of a ZIP archive held in memory into `out_path`.
// Returns the member name.
std::string extract_single_csv(std::string_view zip_bytes, const std::filesystem::path& out_path);

}  // namespace ekma
