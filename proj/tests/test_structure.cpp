#include <atomic>
#include <filesystem>
#include <thread>

// Eigen must precede httplib: <resolv.h> defines _res.
#include "support/synthetic.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include "lforge/core/random.hpp"
#include "lforge/structure/fetch.hpp"
#include "lforge/structure/pockets.hpp"

using namespace lforge;
using namespace lforge::structure;
namespace fs = std::filesystem;
namespace fx = lforge::testing;

namespace {

std::string atom_line(int serial, double x, double y, double z, double b, const char* element = "C") {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "ATOM  %5d  CA  ALA A%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s\n", serial, serial, x,
                y, z, 1.0, b, element);
  return buf;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lforge_structure_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PocketDescriptor pocket(double volume, double depth, double enclosure, double hydro, double arom, int donors,
                        int acceptors, const std::string& id = "p") {
  PocketDescriptor p;
  p.id = id;
  p.volume = volume;
  p.depth = depth;
  p.enclosure = enclosure;
  p.hydrophobicity = hydro;
  p.aromaticity = arom;
  p.donors = donors;
  p.acceptors = acceptors;
  return p;
}

class PdbServer {
 public:
  explicit PdbServer(std::string body) : body_(std::move(body)) {
    server_.Get(R"(/files/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (req.matches[1] == "GOOD1") {
        res.set_content(body_, "chemical/x-pdb");
      } else if (req.matches[1] == "BROKEN") {
        res.set_content("REMARK nothing here\n", "text/plain");
      } else {
        res.status = 404;
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~PdbServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/files"; }
  int hits() const { return hits_; }

 private:
  std::string body_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST(ParsePdb, SingleAtom) {
  const auto s = parse_pdb(atom_line(1, 1.0, 2.0, 3.0, 90.0));
  ASSERT_EQ(s.atoms.size(), 1u);
  EXPECT_EQ(s.atoms[0].position, (Vec3{1.0, 2.0, 3.0}));
  EXPECT_EQ(s.atoms[0].plddt, 90.0);
  EXPECT_EQ(s.atoms[0].element, "C");
}

TEST(ParsePdb, TenAtomsBitExactAndOtherRecordsIgnored) {
  std::string text = "HEADER    FIXTURE\nREMARK   1 synthetic\n";
  const std::vector<Vec3> expected{{-12.345, 0.0, 99.999},  {-11.095, 0.125, 96.499}, {-9.845, 0.25, 92.999},
                                   {-8.595, 0.375, 89.499},  {-7.345, 0.5, 85.999},   {-6.095, 0.625, 82.499},
                                   {-4.845, 0.75, 78.999},   {-3.595, 0.875, 75.499}, {-2.345, 1.0, 71.999},
                                   {-1.095, 1.125, 68.499}};
  for (int i = 0; i < 10; ++i) {
    const auto& p = expected[static_cast<std::size_t>(i)];
    text += atom_line(i + 1, p.x, p.y, p.z, 50.0 + i);
    if (i == 4) text += "TER\n";
  }
  text += "END\n";
  const auto s = parse_pdb(text);
  ASSERT_EQ(s.atoms.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(s.atoms[static_cast<std::size_t>(i)].position, expected[static_cast<std::size_t>(i)]);
}

TEST(ParsePdb, Rejections) {
  EXPECT_THROW(parse_pdb("REMARK only\nREMARK more\n"), ParseError);
  EXPECT_THROW(parse_pdb(""), ParseError);
  std::string bad = atom_line(1, 1, 2, 3, 90);
  bad.replace(38, 8, "   abcde");
  try {
    parse_pdb("REMARK x\n" + bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParsePdb, WriteParseRoundTripIsByteStable) {
  Rng rng(3);
  const std::string text = fx::fixture_pdb("RT", 77.5, rng);
  const auto once = parse_pdb(text, "RT");
  EXPECT_EQ(write_pdb(once), text);
  EXPECT_EQ(write_pdb(parse_pdb(write_pdb(once))), text);
}

TEST(QcPlddt, Thresholds) {
  ModelStructure s;
  s.atoms.resize(3);
  for (auto& a : s.atoms) a.plddt = 100;
  EXPECT_TRUE(qc_plddt(s).pass);
  EXPECT_EQ(qc_plddt(s).mean_plddt, 100.0);
  for (auto& a : s.atoms) a.plddt = 0;
  EXPECT_FALSE(qc_plddt(s).pass);
  EXPECT_EQ(qc_plddt(s).mean_plddt, 0.0);
  s.atoms.resize(2);
  s.atoms[0].plddt = 60;
  s.atoms[1].plddt = 80;
  EXPECT_DOUBLE_EQ(qc_plddt(s).mean_plddt, 70.0);
  EXPECT_TRUE(qc_plddt(s).pass);
  EXPECT_FALSE(qc_plddt(s, 70.5).pass);
  EXPECT_THROW(qc_plddt(ModelStructure{}), ValidationError);
}

TEST(LoadPockets, EmptyListAndRoundTrip) {
  EXPECT_TRUE(parse_pockets(nlohmann::json::parse(R"({"pockets":[]})")).empty());
  const auto doc = nlohmann::json::parse(R"({"pockets":[{"id":"P7","volume":512.5,"depth":14.25,"enclosure":0.625,
    "hydrophobicity":0.375,"aromaticity":3.5,"donors":4,"acceptors":6,"atoms":[[1,2,3],[-1.5,0.25,8]]}]})");
  const auto ps = parse_pockets(doc);
  ASSERT_EQ(ps.size(), 1u);
  const auto& p = ps[0];
  EXPECT_EQ(p.id, "P7");
  EXPECT_EQ(p.volume, 512.5);
  EXPECT_EQ(p.depth, 14.25);
  EXPECT_EQ(p.enclosure, 0.625);
  EXPECT_EQ(p.hydrophobicity, 0.375);
  EXPECT_EQ(p.aromaticity, 3.5);
  EXPECT_EQ(p.donors, 4);
  EXPECT_EQ(p.acceptors, 6);
  ASSERT_EQ(p.atom_coords.size(), 2u);
  EXPECT_EQ(p.atom_coords[1], (Vec3{-1.5, 0.25, 8}));
  const auto again = parse_pockets(pockets_to_json(ps));
  EXPECT_EQ(again[0].atom_coords, p.atom_coords);
  EXPECT_EQ(again[0].volume, p.volume);
}

TEST(LoadPockets, SchemaErrorsNameTheField) {
  auto base = nlohmann::json::parse(R"({"id":"A","volume":1,"depth":1,"enclosure":0.5,"hydrophobicity":0.5,
    "aromaticity":0,"donors":0,"acceptors":0})");
  auto wrap = [](const nlohmann::json& p) { return nlohmann::json{{"pockets", {p}}}; };
  auto bad = base;
  bad["enclosure"] = 1.5;
  EXPECT_THROW(parse_pockets(wrap(bad)), ValidationError);
  bad = base;
  bad.erase("depth");
  try {
    parse_pockets(wrap(bad));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("depth"), std::string::npos);
  }
  bad = base;
  bad["donors"] = "many";
  EXPECT_THROW(parse_pockets(wrap(bad)), ParseError);
  EXPECT_THROW(parse_pockets(nlohmann::json::array()), ParseError);
  const auto dir = scratch("pockets");
  write_file(dir / "broken.json", "{not json");
  EXPECT_THROW(load_pockets(dir / "broken.json"), ParseError);
}

TEST(ScorePockets, CompositeFormula) {
  EXPECT_NEAR(composite_score(pocket(500, 20, 0.8, 0.5, 10, 5, 7)), 177.2, 1e-9);
  EXPECT_EQ(composite_score(pocket(0, 0, 0, 0, 0, 0, 0)), 0.0);
}

TEST(ScorePockets, MinMaxNormalization) {
  // raw 46.3: 0.3*100 + 0.2*10 + 0.2*50 + 0.1*30 + 0.1*3 + 0.1*10
  const auto low = pocket(100, 10, 0.5, 0.3, 3, 4, 6, "low");
  EXPECT_NEAR(composite_score(low), 46.3, 1e-9);
  const auto ranked = score_pockets({pocket(500, 20, 0.8, 0.5, 10, 5, 7, "high"), low});
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].id, "high");
  EXPECT_EQ(ranked[0].norm_score, 1.0);
  EXPECT_EQ(ranked[1].norm_score, 0.0);
  EXPECT_EQ(score_pockets({low})[0].norm_score, 1.0);
  EXPECT_THROW(score_pockets({}), ValidationError);
}

TEST(ScorePockets, RankingMatchesRawOrderAndNormsInRange) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    std::vector<PocketDescriptor> ps;
    for (int i = 0; i < 8; ++i)
      ps.push_back(pocket(1000 * uniform01(rng), 30 * uniform01(rng), uniform01(rng), uniform01(rng), 10 * uniform01(rng),
                          static_cast<int>(uniform_index(rng, 10)), static_cast<int>(uniform_index(rng, 10)),
                          "p" + std::to_string(i)));
    const auto ranked = score_pockets(ps, 8);
    auto by_raw = ps;
    std::stable_sort(by_raw.begin(), by_raw.end(),
                     [](const auto& a, const auto& b) { return composite_score(a) > composite_score(b); });
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_EQ(ranked[i].id, by_raw[i].id);
      EXPECT_GE(ranked[i].norm_score, 0.0);
      EXPECT_LE(ranked[i].norm_score, 1.0);
      if (i > 0) {
        EXPECT_LE(ranked[i].norm_score, ranked[i - 1].norm_score);
      }
    }
    EXPECT_EQ(score_pockets(ps).size(), 3u);
  }
}

TEST(Kmeans, UnitSquareCorners) {
  const std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  const auto hs = kmeans_hotspots(pts, 4, 9);
  auto got = hs.centroids;
  auto cmp = [](const Vec3& a, const Vec3& b) { return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z); };
  std::sort(got.begin(), got.end(), cmp);
  auto want = pts;
  std::sort(want.begin(), want.end(), cmp);
  EXPECT_EQ(got, want);
  EXPECT_EQ(hs.pocket_center, (Vec3{0.5, 0.5, 0}));
  EXPECT_NEAR(hs.pocket_radius, std::sqrt(0.5), 1e-12);
}

TEST(Kmeans, SingleClusterIsMean) {
  Rng rng(8);
  std::vector<Vec3> pts;
  Vec3 sum;
  for (int i = 0; i < 25; ++i) {
    pts.push_back({normal(rng), normal(rng), normal(rng)});
    sum += pts.back();
  }
  const auto hs = kmeans_hotspots(pts, 1, 1);
  ASSERT_EQ(hs.centroids.size(), 1u);
  EXPECT_NEAR(distance(hs.centroids[0], sum / 25.0), 0.0, 1e-12);
}

TEST(Kmeans, SeparatedBlobsRecoverMeans) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 100);
    std::vector<Vec3> pts;
    Vec3 m1, m2;
    for (int i = 0; i < 10; ++i) {
      pts.push_back({normal(rng), normal(rng), normal(rng)});
      m1 += pts.back();
    }
    for (int i = 0; i < 10; ++i) {
      pts.push_back({50 + normal(rng), 50 + normal(rng), normal(rng)});
      m2 += pts.back();
    }
    m1 = m1 / 10.0;
    m2 = m2 / 10.0;
    const auto hs = kmeans_hotspots(pts, 2, seed);
    const auto& c = hs.centroids;
    const double d = std::min(distance(c[0], m1) + distance(c[1], m2), distance(c[0], m2) + distance(c[1], m1));
    EXPECT_LT(d, 1e-6);
  }
}

TEST(Kmeans, ObjectiveNonIncreasingDeterministicAndBounded) {
  Rng rng(31);
  std::vector<Vec3> pts;
  for (int i = 0; i < 120; ++i) pts.push_back({normal(rng, 0, 4), normal(rng, 0, 2), normal(rng, 0, 3)});
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    KmeansTrace tr;
    const auto hs = kmeans_hotspots(pts, 4, seed, 0.0, &tr);
    for (std::size_t i = 1; i < tr.objective.size(); ++i) EXPECT_LE(tr.objective[i], tr.objective[i - 1] + 1e-9);
    EXPECT_LE(tr.iterations, kKmeansMaxIterations);
    for (const auto& c : hs.centroids) EXPECT_LE(distance(c, hs.pocket_center), hs.pocket_radius + 1e-12);
    EXPECT_EQ(kmeans_hotspots(pts, 4, seed).centroids, hs.centroids);
  }
  EXPECT_THROW(kmeans_hotspots({{0, 0, 0}}, 2, 0), ValidationError);
  EXPECT_EQ(kmeans_hotspots(pts, 4, 1, 9.5).pocket_radius, 9.5);
}

TEST(Kmeans, DuplicatePointsStillYieldKCentroids) {
  const std::vector<Vec3> pts(6, Vec3{1, 1, 1});
  const auto hs = kmeans_hotspots(pts, 3, 4);
  EXPECT_EQ(hs.centroids.size(), 3u);
  for (const auto& c : hs.centroids) EXPECT_EQ(c, (Vec3{1, 1, 1}));
}

TEST(Hotspots, JsonRoundTrip) {
  HotspotSet hs{{1, 2, 3}, 4.5, {{1, 1, 1}, {2, 2, 2}}};
  const auto back = hotspots_from_json(hotspots_to_json(hs));
  EXPECT_EQ(back.pocket_center, hs.pocket_center);
  EXPECT_EQ(back.pocket_radius, hs.pocket_radius);
  EXPECT_EQ(back.centroids, hs.centroids);
  EXPECT_THROW(hotspots_from_json(nlohmann::json::object()), ParseError);
}

TEST(Fetch, CacheHitMakesNoNetworkCall) {
  const auto dir = scratch("cache");
  FetchOptions opt;
  opt.cache_dir = dir;
  opt.base_url = "http://127.0.0.1:9/unreachable";
  write_file(cache_path(opt, "CACHED1"), atom_line(1, 1, 2, 3, 91) + atom_line(2, 4, 5, 6, 93));
  FetchCounters counters;
  const auto s = fetch_structure("CACHED1", opt, &counters);
  EXPECT_EQ(s.atoms.size(), 2u);
  EXPECT_EQ(counters.cache_hits.load(), 1);
  EXPECT_EQ(counters.network_requests.load(), 0);
  opt.offline = true;
  EXPECT_THROW(fetch_structure("MISSING", opt), FetchError);
  EXPECT_THROW(fetch_structure("", opt), ValidationError);
}

TEST(Fetch, HttpDownloadCachesAndFlagsFailures) {
  const std::string body = atom_line(1, 1, 2, 3, 88) + atom_line(2, 2, 3, 4, 92) + atom_line(3, 3, 4, 5, 90);
  PdbServer server(body);
  const auto dir = scratch("http");
  FetchOptions opt;
  opt.cache_dir = dir;
  opt.base_url = server.url();
  opt.timeout_seconds = 5;

  FetchCounters counters;
  const auto s = fetch_structure("GOOD1", opt, &counters);
  ASSERT_EQ(s.atoms.size(), 3u);
  EXPECT_EQ(s.atoms[2].position, (Vec3{3, 4, 5}));
  EXPECT_EQ(read_file(cache_path(opt, "GOOD1")), body);
  EXPECT_EQ(counters.network_requests.load(), 1);

  try {
    fetch_structure("VCAN", opt);
    FAIL() << "expected FetchError";
  } catch (const FetchError& e) {
    EXPECT_EQ(e.accession(), "VCAN");
    EXPECT_NE(std::string(e.what()).find("404"), std::string::npos);
  }
  EXPECT_THROW(fetch_structure("BROKEN", opt), ParseError);
  EXPECT_FALSE(fs::exists(cache_path(opt, "BROKEN")));

  const int before = server.hits();
  const auto batch = fetch_all({"GOOD1", "VCAN", "ALSO404", "GOOD1"}, opt, 2);
  EXPECT_EQ(batch.structures.size(), 2u);
  ASSERT_EQ(batch.flagged.size(), 2u);
  EXPECT_EQ(batch.flagged[0].accession, "VCAN");
  EXPECT_EQ(batch.flagged[1].accession, "ALSO404");
  EXPECT_EQ(server.hits() - before, 2);
}

TEST(Fetch, EnvironmentOverrides) {
  ::setenv(kEnvBaseUrl, "http://example.invalid/models", 1);
  ::setenv(kEnvCacheDir, "/tmp/lforge_env_cache", 1);
  ::setenv(kEnvOffline, "1", 1);
  const auto opt = apply_env(FetchOptions{});
  EXPECT_EQ(opt.base_url, "http://example.invalid/models");
  EXPECT_EQ(opt.cache_dir, fs::path("/tmp/lforge_env_cache"));
  EXPECT_TRUE(opt.offline);
  ::unsetenv(kEnvBaseUrl);
  ::unsetenv(kEnvCacheDir);
  ::unsetenv(kEnvOffline);
  EXPECT_THROW(split_url("no-scheme/path"), ValidationError);
}
