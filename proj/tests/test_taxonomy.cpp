#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "mcpscan/taxonomy.hpp"
#include "test_support.hpp"

using namespace mcpscan;

TEST_CASE("partition_cell maps each boolean state to its cell") {
    CHECK(partition_cell({true, false, false}) == PartitionCell::E);
    CHECK(partition_cell({false, true, false}) == PartitionCell::P);
    CHECK(partition_cell({false, false, true}) == PartitionCell::N);
    CHECK(partition_cell({true, true, false}) == PartitionCell::EP);
    CHECK(partition_cell({false, true, true}) == PartitionCell::PN);
    CHECK(partition_cell({true, false, true}) == PartitionCell::EN);
    CHECK(partition_cell({true, true, true}) == PartitionCell::EPN);
    CHECK(partition_cell({false, false, false}) == PartitionCell::None);
}

TEST_CASE("partition_cell is a bijection on the 8 states") {
    int seen = 0;
    for (int bits = 0; bits < 8; ++bits) {
        CapabilitySet s{(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
        auto cell = partition_cell(s);
        CHECK(cell_to_set(cell) == s);
        ++seen;
    }
    CHECK(seen == 8);
}

TEST_CASE("risky and full-chain predicates") {
    CHECK_FALSE(CapabilitySet{}.risky());
    CHECK(CapabilitySet{false, true, false}.risky());
    CHECK(CapabilitySet{true, true, true}.full_chain());
    CHECK_FALSE(CapabilitySet{true, true, false}.full_chain());
}

TEST_CASE("capability labels are stable and round-trip") {
    CHECK(std::string(capability_label(Capability::ExternalIngestion)) == "EIT");
    CHECK(std::string(capability_label(Capability::PrivacyAccess)) == "PAT");
    CHECK(std::string(capability_label(Capability::NetworkAccess)) == "NAT");
    for (auto c : kAllCapabilities) {
        auto back = capability_from_label(capability_label(c));
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
    CHECK_FALSE(capability_from_label("XYZ").has_value());
}

TEST_CASE("per-capability totals equal the sum of cells containing the capability") {
    std::mt19937 rng(7);
    for (int round = 0; round < 50; ++round) {
        std::vector<CapabilitySet> sets;
        std::uniform_int_distribution<int> len(0, 200);
        int n = len(rng);
        for (int i = 0; i < n; ++i) sets.push_back(testsupport::random_caps(rng));

        std::map<PartitionCell, std::uint64_t> cells;
        std::uint64_t eit = 0, pat = 0, nat = 0;
        for (const auto& s : sets) {
            ++cells[partition_cell(s)];
            if (s.eit) ++eit;
            if (s.pat) ++pat;
            if (s.nat) ++nat;
        }
        auto cell = [&](PartitionCell c) { return cells.count(c) ? cells[c] : 0; };
        CHECK(eit == cell(PartitionCell::E) + cell(PartitionCell::EP) + cell(PartitionCell::EN) +
                         cell(PartitionCell::EPN));
        CHECK(pat == cell(PartitionCell::P) + cell(PartitionCell::EP) + cell(PartitionCell::PN) +
                         cell(PartitionCell::EPN));
        CHECK(nat == cell(PartitionCell::N) + cell(PartitionCell::PN) + cell(PartitionCell::EN) +
                         cell(PartitionCell::EPN));
    }
}

TEST_CASE("tool and classified-tool JSON round-trips preserve bytes") {
    ToolRecord t;
    t.server_id = "abc";
    t.server_name = "demo";
    t.name = "get_posts";
    t.description = "Search recent public posts  é with odd  spacing.";
    t.input_schema = json{{"type", "object"}, {"properties", {{"query", {{"type", "string"}}}}}};
    auto back = json(t).get<ToolRecord>();
    CHECK(back == t);

    ClassifiedTool c;
    c.tool = t;
    c.caps = {true, false, true};
    c.judge_ids = {"lex-1", "lex-2", "lex-3"};
    c.ts = "2026-01-01T00:00:00Z";
    auto cback = json(c).get<ClassifiedTool>();
    CHECK(cback == c);
}
