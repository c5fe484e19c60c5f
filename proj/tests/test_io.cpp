#include <gtest/gtest.h>

#include <sstream>

#include "nonloc/io.hpp"
#include "nonloc/report.hpp"

using namespace nonloc;
using io::json;

namespace {

std::vector<std::vector<std::string>> grid_rows(const std::string& report) {
  std::istringstream is(report);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::getline(is, line);  // title
  std::getline(is, line);  // column labels
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string c;
    ls >> c;  // row label
    while (ls >> c) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Json, KetSchema) {
  const auto j = io::encode(eta(1, 3));
  EXPECT_EQ(j["dim"], 3);
  EXPECT_EQ(j["amps"].size(), 3u);
  EXPECT_EQ(j["amps"][1][0].get<double>(), -1.0);
  const auto k = io::decode_ket(j);
  EXPECT_NEAR(std::abs(inner(k, eta(1, 3)) - complex(2, 0)), 0.0, 1e-15);
}

TEST(Json, StateLabelNull) {
  const ProductState s({Ket::basis(3, 0), Ket::basis(3, 1)});
  const auto j = io::encode(s);
  EXPECT_TRUE(j["label"].is_null());
  EXPECT_FALSE(io::decode_state(j).label().has_value());
}

TEST(Json, OpsRoundTripIsByteIdentical) {
  for (const auto& ops : {tripartite(3, 4, 5), fourpartite(3, 3, 3, 3), fivepartite(3, 3, 3, 3, 3),
                          embed(tripartite(3, 3, 3), {4, 4, 4}), computational_basis({3, 3, 3})}) {
    const auto text = io::dump(io::encode(ops));
    const auto back = io::decode_ops(io::parse(text));
    EXPECT_EQ(io::dump(io::encode(back)), text) << ops.name;
    EXPECT_EQ(back.blocks, ops.blocks);
    EXPECT_EQ(shipped_kind(back), shipped_kind(ops));
  }
}

TEST(Json, MalformedInputs) {
  EXPECT_THROW(io::parse("{not json"), io::FormatError);
  EXPECT_THROW(io::decode_ops(json::object()), io::FormatError);
  auto j = io::encode(tripartite(3, 3, 3));
  j["states"][0]["parties"][0]["dim"] = 4;
  EXPECT_THROW(io::decode_ops(j), io::FormatError);
  j = io::encode(tripartite(3, 3, 3));
  j["states"][0]["parties"][0]["amps"] = json::array({json::array({0, 0}), json::array({0, 0}), json::array({0, 0})});
  EXPECT_THROW(io::decode_ops(j), io::FormatError);
  j = io::encode(tripartite(3, 3, 3));
  j["blocks"][0]["roles"][0] = "zeta";
  EXPECT_THROW(io::decode_ops(j), io::FormatError);
  j = io::encode(tripartite(3, 3, 3));
  j["states"][0]["label"] = 5;
  EXPECT_THROW(io::decode_ops(j), io::FormatError);
  j = io::encode(tripartite(3, 3, 3));
  j["dims"] = json::array({3, 3, 4});
  EXPECT_THROW(io::decode_ops(j), io::FormatError);
}

TEST(Json, ScriptRoundTripAndMinimalSteps) {
  const auto ops = tripartite(3, 3, 3);
  const auto steps = script_for(ops, measuring_group(ops.dims, 1));
  const auto text = io::dump(io::encode(steps));
  const auto back = io::decode_script(io::parse(text));
  EXPECT_EQ(back, steps);
  const auto minimal = io::decode_script(io::parse(R"([{"rule": "BlockTrivial", "party": 0,
      "families": [{"block": "C1"}], "u_t": [0, 0]}])"));
  ASSERT_EQ(minimal.size(), 1u);
  EXPECT_EQ(minimal[0].families[0].family_index, 0);
  EXPECT_THROW(io::decode_script(io::parse(R"([{"rule": "Guess", "party": 0}])")), io::FormatError);
  EXPECT_THROW(io::decode_script(io::parse(R"({"rule": "BlockZeros"})")), io::FormatError);
}

TEST(Json, SplitByParty) {
  const auto ops = tripartite(3, 3, 3);
  std::vector<ProofStep> all;
  for (const auto& g : measuring_groups(ops.dims)) {
    const auto s = script_for(ops, g);
    all.insert(all.end(), s.begin(), s.end());
  }
  const auto parts = io::split_by_party(all);
  ASSERT_EQ(parts.size(), 3u);
  for (const auto& [p, steps] : parts) EXPECT_TRUE(run(ops, measuring_group(ops.dims, p), steps).valid);
}

TEST(Json, CertificateRoundTripRechecks) {
  for (const auto& ops : {tripartite(3, 3, 3), embed(tripartite(3, 3, 3), {4, 3, 3})}) {
    const auto cert = certify_all(ops).certificates.at(0);
    const auto text = io::dump(io::encode(cert));
    const auto back = io::decode_certificate(io::parse(text));
    EXPECT_EQ(io::dump(io::encode(back)), text);
    EXPECT_TRUE(recheck(back).ok);
    EXPECT_EQ(back.valid, cert.valid);
  }
}

TEST(Json, VerdictSchema) {
  const auto ops = computational_basis({3, 3, 3});
  const auto j = io::encode(check_group(ops, measuring_group(ops.dims, 0)));
  EXPECT_EQ(j["group"], "BC");
  EXPECT_EQ(j["nullity"], 9);
  EXPECT_EQ(j["trivial"], false);
  ASSERT_TRUE(j["witness"].is_array());
  EXPECT_EQ(j["witness"].size(), 9u);
  const auto t = tripartite(3, 3, 3);
  EXPECT_TRUE(io::encode(check_group(t, measuring_group(t.dims, 0)))["witness"].is_null());
}

TEST(Report, TripartiteGrid) {
  const auto rows = grid_rows(grid_report(tripartite(3, 3, 3), 0));
  ASSERT_EQ(rows.size(), 3u);
  using V = std::vector<std::string>;
  EXPECT_EQ(rows[0], (V{"D4", "D3", "D3", "D2", "D3", "D3", "D2", "D1", "D1"}));
  EXPECT_EQ(rows[1], (V{"C1", "C1", "C2", "D2", ".", "C2", "D2", "D1", "D1"}));
  EXPECT_EQ(rows[2], (V{"C1", "C1", "C2", "C3", "C3", "C2", "C3", "C3", "C4"}));
}

TEST(Report, Shapes) {
  const auto four = grid_rows(grid_report(fourpartite(3, 3, 3, 3), 0));
  ASSERT_EQ(four.size(), 3u);
  EXPECT_EQ(four[0].size(), 27u);
  const auto five = grid_rows(grid_report(fivepartite(3, 3, 3, 3, 3), 2));
  ASSERT_EQ(five.size(), 3u);
  EXPECT_EQ(five[0].size(), 81u);
  const auto full = full_report(fourpartite(3, 3, 3, 3));
  EXPECT_NE(full.find("D | ABC"), std::string::npos);
  EXPECT_NE(full.find("C3:"), std::string::npos);
}
