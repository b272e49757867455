#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "ekma/download.hpp"
#include "ekma/error.hpp"
#include "helpers.hpp"
#include "zip_writer.hpp"

using namespace ekma;

namespace {

using testing::make_zip;

const std::string kCsv = "\"State Code\",\"Sample Measurement\"\n\"06\",0.041\n";

// Local HTTP server on an ephemeral port, counting requests.
class Server {
 public:
  Server() {
    server_.Get(R"(/airdata/hourly_(\d+)_(\d+)\.zip)", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      const std::string code = req.matches[1];
      if (code == "44201") {
        res.set_content(make_zip({{"hourly_44201_2024.csv", kCsv}}), "application/zip");
      } else if (code == "42602") {
        res.set_content("<html>not a zip</html>", "text/html");
      } else if (code == "42101") {
        res.status = 503;
      } else {
        res.status = 404;
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Server() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/airdata"; }
  int hits() const { return hits_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST_CASE("airdata url template") {
  CHECK(airdata_url(44201, 2024) == "https://aqs.epa.gov/aqsweb/airdata/hourly_44201_2024.zip");
  CHECK(airdata_url(88101, 2025, "http://mirror/x/") == "http://mirror/x/hourly_88101_2025.zip");
}

TEST_CASE("zip: deflated and stored single members extract") {
  testing::TempDir dir("zip");
  for (bool deflate : {true, false}) {
    const auto out = dir / "a.csv";
    CHECK(extract_single_csv(make_zip({{"a.csv", kCsv, deflate}}), out) == "a.csv");
    CHECK(testing::slurp(out) == kCsv);
  }
}

TEST_CASE("zip: a large member survives the round trip") {
  std::string big;
  for (int i = 0; i < 200000; ++i) big += std::to_string(i) + ",0.0" + std::to_string(i % 97) + "\n";
  testing::TempDir dir("zipbig");
  extract_single_csv(make_zip({{"big.csv", big}}), dir / "big.csv");
  CHECK(testing::slurp(dir / "big.csv") == big);
}

TEST_CASE("zip: rejects non-zip payloads and multi-member archives") {
  testing::TempDir dir("zipbad");
  CHECK_THROWS_AS(extract_single_csv("<html></html>", dir / "x.csv"), FormatError);
  CHECK_THROWS_AS(extract_single_csv(make_zip({{"a.csv", kCsv}, {"b.csv", kCsv}}), dir / "x.csv"), FormatError);
  CHECK_THROWS_AS(extract_single_csv(make_zip({{"readme.txt", kCsv}}), dir / "x.csv"), FormatError);
  CHECK_FALSE(std::filesystem::exists(dir / "x.csv"));
}

TEST_CASE("download: fetches, extracts, and is idempotent") {
  Server server;
  testing::TempDir dir("dl");
  DownloadOptions opts{server.base(), 10};
  const auto path = download_airdata(44201, 2024, dir.path(), opts);
  CHECK(path == dir / "hourly_44201_2024.csv");
  CHECK(testing::slurp(path) == kCsv);
  CHECK(server.hits() == 1);
  CHECK(download_airdata(44201, 2024, dir.path(), opts) == path);
  CHECK(server.hits() == 1);
}

TEST_CASE("download: HTTP failures are retryable and carry the status") {
  Server server;
  testing::TempDir dir("dl404");
  DownloadOptions opts{server.base(), 10};
  try {
    download_airdata(88101, 2024, dir.path(), opts);
    FAIL("expected HttpError");
  } catch (const HttpError& e) {
    CHECK(e.status() == 404);
    CHECK(e.retryable());
  }
  try {
    download_airdata(42101, 2024, dir.path(), opts);
    FAIL("expected HttpError");
  } catch (const HttpError& e) {
    CHECK(e.status() == 503);
  }
}

TEST_CASE("download: non-zip body is a format error") {
  Server server;
  testing::TempDir dir("dlhtml");
  CHECK_THROWS_AS(download_airdata(42602, 2024, dir.path(), {server.base(), 10}), FormatError);
  CHECK_FALSE(std::filesystem::exists(dir / "hourly_42602_2024.csv"));
}

TEST_CASE("download: connection failure is retryable") {
  testing::TempDir dir("dlrefused");
  DownloadOptions opts{"http://127.0.0.1:1/airdata", 2};
  try {
    download_airdata(44201, 2024, dir.path(), opts);
    FAIL("expected HttpError");
  } catch (const HttpError& e) {
    CHECK(e.retryable());
  }
}
