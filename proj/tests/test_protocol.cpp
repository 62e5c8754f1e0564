#include <catch2/catch_amalgamated.hpp>

#include <csignal>

#include "mcpscan/client.hpp"
#include "mcpscan/scan.hpp"
#include "test_support.hpp"

using namespace mcpscan;
using testsupport::mock_manifest;

namespace {

SessionOptions fast_opts(int ms = 5000) {
    SessionOptions opts;
    opts.handshake_timeout = std::chrono::milliseconds(ms);
    opts.request_timeout = std::chrono::milliseconds(ms);
    return opts;
}

std::filesystem::path proto(const std::string& file) {
    return testsupport::fixtures_dir() / "protocol" / file;
}

} // namespace

TEST_CASE("well-formed server walks the full state machine") {
    auto session = ServerSession::launch(mock_manifest("well", proto("wellformed.json")), fast_opts());
    REQUIRE(session.state() == SessionState::launched);
    REQUIRE(session.initialize());
    CHECK(session.state() == SessionState::initialized);
    // Fixture advertises its own version string, captured verbatim and
    // tolerated despite the mismatch.
    CHECK(session.protocol_version() == "fixture-proto-9");
    CHECK(session.version_mismatch());

    auto tools = session.list_tools();
    REQUIRE(tools.ok());
    CHECK(session.state() == SessionState::listed);
    REQUIRE(tools.value().size() == 1);
    CHECK(tools.value()[0].name == "get_posts");
    CHECK(tools.value()[0].description ==
          "Search recent public posts matching a keyword query.");

    CHECK(session.last_request_id() >= 2); // initialize + tools/list, strictly increasing
    auto outcome = session.close(tools.value().size());
    CHECK(session.state() == SessionState::closed);
    CHECK(outcome.success);
    CHECK(outcome.tool_count == 1);
}

TEST_CASE("pagination is followed until the cursor is exhausted") {
    auto result = scan_server(mock_manifest("paged", proto("paginated.json")), fast_opts());
    REQUIRE(result.outcome.success);
    REQUIRE(result.tools.size() == 3);
    CHECK(result.tools[0].name == "alpha");
    CHECK(result.tools[1].name == "beta");
    CHECK(result.tools[2].name == "gamma");
}

TEST_CASE("a zero-tool server lists cleanly") {
    auto session = ServerSession::launch(mock_manifest("empty", proto("zerotool.json")), fast_opts());
    REQUIRE(session.initialize());
    auto tools = session.list_tools();
    REQUIRE(tools.ok());
    CHECK(tools.value().empty());
    CHECK(session.state() == SessionState::listed);
    session.close();
}

TEST_CASE("garbage bytes fail the handshake as malformed-response") {
    auto session = ServerSession::launch(mock_manifest("garbage", proto("garbage.json")), fast_opts());
    REQUIRE(session.state() == SessionState::launched);
    CHECK_FALSE(session.initialize());
    CHECK(session.state() == SessionState::failed);
    CHECK(session.cause() == FailureCause::malformed_response);
    auto outcome = session.close();
    CHECK_FALSE(outcome.success);
    CHECK(outcome.cause == "malformed-response");
}

TEST_CASE("a hanging server times out and leaves no orphan process") {
    auto session = ServerSession::launch(mock_manifest("hang", proto("hang.json")), fast_opts(1000));
    REQUIRE(session.state() == SessionState::launched);
    pid_t pid = session.pid();
    REQUIRE(pid > 0);
    CHECK_FALSE(session.initialize());
    CHECK(session.cause() == FailureCause::timeout);
    auto outcome = session.close();
    CHECK_FALSE(outcome.success);
    CHECK(outcome.cause == "timeout");
    // The child is really gone: not even a zombie remains to signal.
    CHECK(::kill(pid, 0) == -1);
    CHECK(errno == ESRCH);
}

TEST_CASE("a server that exits immediately reports immediate-exit") {
    auto session = ServerSession::launch(mock_manifest("exit", proto("exit.json")), fast_opts());
    bool initialized = session.state() == SessionState::launched && session.initialize();
    CHECK_FALSE(initialized);
    CHECK(session.state() == SessionState::failed);
    CHECK(session.cause() == FailureCause::immediate_exit);
    session.close();
}

TEST_CASE("a server dying mid-session fails without wedging the scanner") {
    auto session =
        ServerSession::launch(mock_manifest("half", proto("exit_after_init.json")), fast_opts());
    REQUIRE(session.initialize());
    auto tools = session.list_tools();
    CHECK_FALSE(tools.ok());
    CHECK(session.state() == SessionState::failed);
    session.close();
}

TEST_CASE("a missing binary is a spawn failure") {
    ServerManifest m;
    m.name = "missing";
    m.runner = Runner::custom;
    m.args = {"/no/such/binary-mcpscan"};
    auto session = ServerSession::launch(m, fast_opts());
    CHECK(session.state() == SessionState::failed);
    CHECK(session.cause() == FailureCause::spawn_failure);
    auto outcome = session.close();
    CHECK(outcome.cause == "spawn-failure");
}

TEST_CASE("non-positive timeout is a precondition violation") {
    SessionOptions opts;
    opts.handshake_timeout = std::chrono::milliseconds(0);
    auto session = ServerSession::launch(mock_manifest("well", proto("wellformed.json")), opts);
    CHECK(session.state() == SessionState::failed);
    CHECK(session.cause() == FailureCause::precondition);
}

TEST_CASE("malformed tool entries are skipped and counted, not fatal") {
    auto session =
        ServerSession::launch(mock_manifest("mal", proto("malformed_entry.json")), fast_opts());
    REQUIRE(session.initialize());
    auto tools = session.list_tools();
    REQUIRE(tools.ok());
    REQUIRE(tools.value().size() == 2);
    CHECK(tools.value()[0].name == "good_one");
    CHECK(tools.value()[1].name == "good_two");
    CHECK(session.skipped_entries() == 1);
    auto outcome = session.close(2);
    CHECK(outcome.skipped_entries == 1);
}

TEST_CASE("the state machine admits no shortcut to listing") {
    auto session = ServerSession::launch(mock_manifest("well", proto("wellformed.json")), fast_opts());
    REQUIRE(session.state() == SessionState::launched);
    auto tools = session.list_tools(); // skipping initialize
    CHECK_FALSE(tools.ok());
    CHECK(session.state() == SessionState::failed);
    CHECK(session.cause() == FailureCause::precondition);
    session.close();
}

TEST_CASE("close is idempotent and reports the recorded failure cause") {
    auto session = ServerSession::launch(mock_manifest("garbage", proto("garbage.json")), fast_opts());
    session.initialize();
    auto first = session.close();
    auto second = session.close();
    CHECK(first.success == second.success);
    CHECK(first.cause == second.cause);
    CHECK(second.cause == "malformed-response");
}

TEST_CASE("fixture listings return byte-identical descriptions") {
    auto report = jsonl::read_file(proto("paginated.json"));
    REQUIRE(report.ok());
    auto fixture = json::parse(report.value());
    auto result = scan_server(mock_manifest("paged", proto("paginated.json")), fast_opts());
    REQUIRE(result.tools.size() == fixture["tools"].size());
    for (std::size_t i = 0; i < result.tools.size(); ++i) {
        CHECK(result.tools[i].name == fixture["tools"][i]["name"].get<std::string>());
        CHECK(result.tools[i].description ==
              fixture["tools"][i]["description"].get<std::string>());
        CHECK(result.tools[i].input_schema == fixture["tools"][i]["inputSchema"]);
    }
}

TEST_CASE("scan_batch runs sessions concurrently and keeps failures as data") {
    auto manifests = testsupport::census_manifests();
    ServerManifest broken;
    broken.name = "broken";
    broken.runner = Runner::custom;
    broken.args = {"/no/such/binary-mcpscan"};
    manifests.push_back(broken);

    auto results = scan_batch(manifests, fast_opts(), 4);
    REQUIRE(results.size() == 4);
    std::size_t connected = 0, tools = 0;
    for (const auto& r : results) {
        if (r.outcome.success) ++connected;
        tools += r.tools.size();
    }
    CHECK(connected == 3);
    CHECK(tools == 10);
    CHECK_FALSE(results[3].outcome.success);
    CHECK(results[3].outcome.cause == "spawn-failure");
}
