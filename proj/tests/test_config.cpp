#include <gtest/gtest.h>

#include <sstream>

#include "rml/config.hpp"

using namespace rml;

namespace {

IniFile ini(const std::string& text) {
  std::istringstream in(text);
  return parse_ini(in);
}

const char* kBase = R"(
# global
n_list = 64, 128
replicas = 5
seed = 11
p = 1, 2

[law]
kind = two_point
p = 0.3

[region]
v0_scale = 10   ; trailing comment
A1 = 2

[delta-sweep]
replicas = 7
)";

}  // namespace

TEST(Ini, SectionsAndComments) {
  const auto f = ini(kBase);
  EXPECT_EQ(f.at("").at("n_list"), "64, 128");
  EXPECT_EQ(f.at("law").at("kind"), "two_point");
  EXPECT_EQ(f.at("region").at("v0_scale"), "10");
  EXPECT_EQ(f.at("delta-sweep").at("replicas"), "7");
}

TEST(Ini, Malformed) {
  EXPECT_THROW(ini("[law\nkind=x\n"), UsageError);
  EXPECT_THROW(ini("justtext\n"), UsageError);
  EXPECT_THROW(ini("a = 1\na = 2\n"), UsageError);
  EXPECT_THROW(ini("[]\n"), UsageError);
  EXPECT_THROW(load_ini("/nonexistent/config.ini"), UsageError);
}

TEST(Config, CommandSectionOverrides) {
  const auto f = ini(kBase);
  const auto d = make_config(f, Command::delta_sweep);
  EXPECT_EQ(d.replicas, 7u);
  const auto r = make_config(f, Command::rigidity);
  EXPECT_EQ(r.replicas, 5u);
  EXPECT_EQ(d.n_list, (std::vector<std::size_t>{64, 128}));
  EXPECT_EQ(d.p_list, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(*d.seed, 11u);
  EXPECT_EQ(*d.v0_scale, 10.0);
  EXPECT_EQ(d.A1, 2.0);
  EXPECT_NEAR(d.law().mu4(), EntryLaw::two_point(0.3).mu4(), 0);
  EXPECT_EQ(*d.region_v0(64), 10.0 / 64);
  EXPECT_EQ(d.point_v(100, 10.0), 0.1);
}

TEST(Config, UnknownKeysAndSections) {
  EXPECT_THROW(make_config(ini("n = 4\nrepliacs = 3\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\n[regoin]\nA0 = 1\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\n[rigidity]\nCc = 1\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\n[region]\nreplicas = 2\n"), Command::delta_sweep), UsageError);
}

TEST(Config, ValueValidation) {
  EXPECT_THROW(make_config(ini("replicas = 3\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 0\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\nreplicas = -1\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\np = 0.5\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\nn_list = 8\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\nv = 1\nv_scale = 2\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\nquantiles = lower\n"), Command::rigidity), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\n[region]\nrandom_z = maybe\n"), Command::verify_identities), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\n[law]\nkind = cauchy\n"), Command::delta_sweep), UsageError);
  EXPECT_THROW(make_config(ini("n = 4\ncommand = rigidity\n"), Command::delta_sweep), UsageError);
  EXPECT_NO_THROW(make_config(ini("n = 4\ncommand = rigidity\n"), Command::rigidity));
}

TEST(Config, Defaults) {
  const auto c = make_config(ini("n = 16\n"), Command::smoothing);
  EXPECT_EQ(c.law().id(), "rademacher");
  EXPECT_FALSE(c.seed);
  EXPECT_EQ(c.V, 4.0);
  EXPECT_EQ(c.k_n, 1000u);
  EXPECT_EQ(c.quad_tol, 1e-6);
  EXPECT_FALSE(c.region_v0(16));
  EXPECT_EQ(parse_command("rate-fit"), Command::rate_fit);
  EXPECT_THROW(parse_command("bogus"), UsageError);
}

TEST(ConfigHash, StableAndSensitive) {
  const auto a = make_config(ini(kBase), Command::delta_sweep);
  const std::string h = config_hash(a);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, config_hash(make_config(ini(kBase), Command::delta_sweep)));

  auto b = a;
  b.out = "elsewhere";
  b.jobs = 7;
  EXPECT_EQ(config_hash(b), h);

  auto c = a;
  c.replicas = 8;
  EXPECT_NE(config_hash(c), h);
  auto d = a;
  d.seed = 12;
  EXPECT_NE(config_hash(d), h);
  auto e = a;
  e.law_block["p"] = "0.31";
  EXPECT_NE(config_hash(e), h);
  EXPECT_NE(config_hash(make_config(ini(kBase), Command::rate_fit)), h);

  // Formatting of the source text does not matter.
  const auto f = make_config(ini("seed=11\nn_list=64,128\nreplicas=5\np=1.0,2\n[law]\nkind=two_point\np=0.30\n"
                                 "[region]\nv0_scale=10.0\nA1=2\n[delta-sweep]\nreplicas=7\n"),
                             Command::delta_sweep);
  EXPECT_EQ(config_hash(f), h);
}
