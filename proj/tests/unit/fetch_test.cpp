#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <gtest/gtest.h>

#include <thread>

#include "depsentry/errors.hpp"
#include "depsentry/ingest.hpp"
#include "depsentry/pipeline.hpp"
#include "support/archives.hpp"

namespace depsentry {
namespace {

// Loopback registry serving one npm tarball with a configurable digest.
class StubRegistry {
 public:
  explicit StubRegistry(std::string shasum) : shasum_(std::move(shasum)) {
    tarball_ = testing::gzip(
        testing::make_tar({{"package/package.json", R"({"name":"left-pad","version":"1.3.0"})"},
                           {"package/index.js", "module.exports = function leftPad() {};\n"}}));
    if (shasum_.empty()) shasum_ = hex_digest("sha1", tarball_);
    server_.Get("/left-pad/-/left-pad-1.3.0.tgz", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(tarball_, "application/octet-stream");
    });
    server_.Get("/left-pad/1.3.0", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"dist":{"shasum":")" + shasum_ + R"("}})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubRegistry() {
    server_.stop();
    thread_.join();
  }

  Config config() const {
    return Config::from_json(
        {{"registry", {{"npm", {{"base_url", "http://127.0.0.1:" + std::to_string(port_)}}}}}});
  }
  const std::string& tarball() const { return tarball_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  std::string tarball_;
  std::string shasum_;
  int port_ = 0;
};

ErrorCode fetch_error(const StubRegistry& stub, const PackageCoordinates& coords) {
  try {
    fetch_package(coords, RegistrySource::from_config(stub.config(), coords.ecosystem));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "fetch succeeded";
  return ErrorCode::IoError;
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(hex_digest("sha1", "abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(hex_digest("sha256", "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_TRUE(digest_matches("sha1", "A9993E364706816ABA3E25717850C26C9CD0D89D", "abc"));
  // SRI form: sha256 of "abc", base64.
  EXPECT_TRUE(digest_matches("sha512", "sha256-ungWv48Bz+pBQUDeXa4iI7ADYaOWF3qctBD/YfIAFa0=", "abc"));
  EXPECT_FALSE(digest_matches("sha1", "00", "abc"));
}

TEST(UrlTemplates, ExpandsScopedAndMavenNames) {
  EXPECT_EQ(expand_url_template("{base}/{name}/-/{basename}-{version}.tgz",
                                {Ecosystem::Npm, "@scope/pkg", "1.0.0"}, "https://r"),
            "https://r/@scope/pkg/-/pkg-1.0.0.tgz");
  EXPECT_EQ(expand_url_template("{base}/{group_path}/{artifact}/{version}",
                                {Ecosystem::Maven, "org.example:lib", "2.1"}, "https://m"),
            "https://m/org/example/lib/2.1");
}

TEST(Fetch, ServesStubTarball) {
  StubRegistry stub("");
  const PackageCoordinates coords{Ecosystem::Npm, "left-pad", "1.3.0"};
  const auto fetched = fetch_package(coords, RegistrySource::from_config(stub.config(), Ecosystem::Npm));
  EXPECT_EQ(fetched.bytes, stub.tarball());
  EXPECT_EQ(fetched.format, archive::Format::TarGz);
}

TEST(Fetch, UnknownNameIsNotFound) {
  StubRegistry stub("");
  EXPECT_EQ(fetch_error(stub, {Ecosystem::Npm, "no-such-package", "1.0.0"}), ErrorCode::NotFound);
}

TEST(Fetch, WrongDigestIsChecksumMismatch) {
  StubRegistry stub(std::string(40, '0'));
  EXPECT_EQ(fetch_error(stub, {Ecosystem::Npm, "left-pad", "1.3.0"}), ErrorCode::ChecksumMismatch);
}

TEST(Fetch, GoHasNoRegistryProtocol) {
  try {
    RegistrySource::from_config(Config::defaults(), Ecosystem::Go);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedFormat);
  }
}

TEST(Fetch, CoordinateTargetsNeedExplicitOptIn) {
  StubRegistry stub("");
  try {
    load_target("npm:left-pad@1.3.0", stub.config(), false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FetchDisabled);
  }
  const auto snap = load_target("npm:left-pad@1.3.0", stub.config(), true);
  EXPECT_EQ(snap->coords.name, "left-pad");
  EXPECT_EQ(snap->coords.version, "1.3.0");
}

TEST(Coordinates, Parse) {
  const auto c = parse_coordinates("npm:@scope/x@1.2.3");
  ASSERT_TRUE(c);
  EXPECT_EQ(c->name, "@scope/x");
  EXPECT_EQ(c->version, "1.2.3");
  const auto m = parse_coordinates("mvn:org.example:lib@2.0");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->ecosystem, Ecosystem::Maven);
  EXPECT_EQ(m->name, "org.example:lib");
  EXPECT_FALSE(parse_coordinates("left-pad@1.0"));
  EXPECT_FALSE(parse_coordinates("npm:left-pad"));
}

}  // namespace
}  // namespace depsentry
