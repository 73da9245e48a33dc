#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dlora/engine.hpp"
#include "support/oracles.hpp"

using namespace dlora;

namespace {

// Small deterministic configs keep these tests fast.
SimConfig small_config(const std::string& policy, std::uint64_t seed) {
  SimConfig c;
  c.n_nodes = 15;
  c.radius_m = 1000.0;
  c.packets_per_node_per_episode = 60;
  c.n_train_episodes = 4;
  c.n_test_episodes = 2;
  c.seed = seed;
  c.policy = parse_policy(policy);
  return c;
}

SimConfig singleton_domains(SimConfig c, int sf, double bw, double cf, int tp) {
  c.domains.sf = {sf};
  c.domains.bw_hz = {bw};
  c.domains.cf_hz = {cf};
  c.domains.tp_dbm = {tp};
  return c;
}

}  // namespace

TEST_CASE("single node with a strong link delivers everything") {
  SimConfig c = singleton_domains(small_config("random", 1), 9, 125e3, 470.1e6, 14);
  c.n_nodes = 1;
  c.node_positions = {{100.0, 0.0}};
  c.packets_per_node_per_episode = 200;
  c.channel.shadowing_sigma_db = 0.0;
  c.channel.noise_sigma_db = 0.0;
  SimEngine engine(c);
  const EpisodeResult ep = engine.run_episode(Phase::Test);
  CHECK(ep.metrics.pdr == 1.0);
  CHECK(ep.nodes[0].sent.size() == 200);
  for (const PacketRecord& r : ep.nodes[0].sent) CHECK(r.fate == PacketFate::Received);
}

TEST_CASE("two co-located nodes on identical parameters collide") {
  SimConfig c = singleton_domains(small_config("random", 3), 9, 125e3, 470.1e6, 14);
  c.n_nodes = 2;
  c.node_positions = {{500.0, 0.0}, {500.0, 0.0}};
  c.packets_per_node_per_episode = 50;
  c.lambda_pps = 1000.0;  // near-zero gaps force full overlap
  c.channel.shadowing_sigma_db = 0.0;  // equal RSSI: neither captures
  SimEngine engine(c);
  const EpisodeResult ep = engine.run_episode(Phase::Test);
  CHECK(ep.metrics.pdr == 0.0);
  for (const Node& n : ep.nodes)
    for (const PacketRecord& r : n.sent) CHECK(r.fate == PacketFate::CollisionLoss);
}

TEST_CASE("a far node at low power is signal-loss dominated") {
  SimConfig c = singleton_domains(small_config("random", 5), 12, 125e3, 470.1e6, 2);
  c.n_nodes = 1;
  c.node_positions = {{10000.0, 0.0}};
  c.packets_per_node_per_episode = 400;
  SimEngine engine(c);
  const EpisodeResult ep = engine.run_episode(Phase::Test);
  CHECK(ep.metrics.pdr < 0.2);
  std::size_t signal = 0;
  for (const PacketRecord& r : ep.nodes[0].sent)
    if (r.fate == PacketFate::SignalLoss) ++signal;
  CHECK(signal > ep.nodes[0].sent.size() / 2);
}

TEST_CASE("fate precedence: collision loss wins when both conditions hold") {
  SimConfig c = singleton_domains(small_config("random", 7), 9, 125e3, 470.1e6, 2);
  c.n_nodes = 2;
  c.node_positions = {{20000.0, 0.0}, {20000.0, 0.0}};  // far below sensitivity
  c.packets_per_node_per_episode = 30;
  c.lambda_pps = 1000.0;
  c.channel.shadowing_sigma_db = 0.0;
  SimEngine engine(c);
  const EpisodeResult ep = engine.run_episode(Phase::Test);
  bool saw_both = false;
  for (const Node& n : ep.nodes)
    for (const PacketRecord& r : n.sent) {
      if (r.collided && r.signal_lost) {
        saw_both = true;
        CHECK(r.fate == PacketFate::CollisionLoss);
      }
      // Single fate, consistent with the flags.
      if (r.fate == PacketFate::Received) {
        CHECK_FALSE(r.collided);
        CHECK_FALSE(r.signal_lost);
      }
    }
  CHECK(saw_both);
}

TEST_CASE("capture threshold override changes outcomes") {
  // Node A sits 7 dB above node B (mean path loss). With the default 6 dB
  // capture threshold A survives their collisions; raising it to 8 dB kills
  // both sides.
  auto base = [] {
    SimConfig c = singleton_domains(small_config("random", 11), 9, 125e3, 470.1e6, 14);
    c.n_nodes = 2;
    c.node_positions = {{1000.0, 0.0}, {2004.0, 0.0}};  // ~7 dB path-loss gap
    c.packets_per_node_per_episode = 40;
    c.lambda_pps = 1000.0;
    c.channel.shadowing_sigma_db = 0.0;
    c.channel.noise_sigma_db = 0.0;
    return c;
  }();

  SimEngine capture6(base);
  const EpisodeResult ep6 = capture6.run_episode(Phase::Test);
  CHECK(ep6.metrics.pdr > 0.4);  // node A's packets get through

  SimConfig strict = base;
  strict.collision.capture_threshold_db = 8.0;
  SimEngine capture8(strict);
  const EpisodeResult ep8 = capture8.run_episode(Phase::Test);
  CHECK(ep8.metrics.pdr == 0.0);
}

TEST_CASE("online fate resolution equals batch collision resolution") {
  SimConfig c = small_config("random", 13);
  c.n_nodes = 10;
  c.packets_per_node_per_episode = 40;
  c.lambda_pps = 2.0;  // dense air
  c.radius_m = 800.0;
  SimEngine engine(c);
  std::vector<PacketRecord> trace;
  engine.run_episode(Phase::Test, &trace);
  REQUIRE(trace.size() == 400);

  std::vector<Transmission> batch;
  for (const PacketRecord& r : trace) {
    Transmission t;
    t.packet_id = r.packet_id;
    t.node_id = r.node_id;
    t.params = r.params;
    t.start_s = r.start_s;
    t.end_s = r.start_s + r.toa_s;
    t.rssi_dbm = r.rssi_dbm;
    batch.push_back(t);
  }
  const auto resolved = resolve_collisions(batch, c.collision.capture_threshold_db);
  std::size_t collisions = 0;
  for (const PacketRecord& r : trace) {
    CHECK(r.collided == resolved.at(r.packet_id));
    if (r.collided) ++collisions;
  }
  CHECK(collisions > 0);  // the scenario actually exercises collisions
}

TEST_CASE("ledger conservation and received-packet constraints") {
  for (const char* policy : {"random", "round-robin", "adr", "rs-lora", "dlora-pdr"}) {
    SimConfig c = small_config(policy, 17);
    SimEngine engine(c);
    for (int e = 0; e < 3; ++e) {
      const EpisodeResult ep = engine.run_episode(Phase::Training);
      std::size_t sent = 0, ok = 0, lost = 0;
      for (const Node& n : ep.nodes) {
        sent += n.sent.size();
        ok += n.received_ok.size();
        lost += n.lost.size();
        CHECK(n.sent.size() == static_cast<std::size_t>(c.packets_per_node_per_episode));
      }
      CHECK(sent == ok + lost);
      CHECK(ok == ep.gateway.received.size());
      for (const PacketRecord& r : ep.gateway.received) {
        CHECK(r.fate == PacketFate::Received);
        CHECK_FALSE(r.collided);
        CHECK_FALSE(r.signal_lost);
      }
      CHECK(ep.metrics.pdr >= 0.0);
      CHECK(ep.metrics.pdr <= 1.0);
      CHECK(ep.metrics.ee >= 0.0);
      CHECK(ep.metrics.th >= 0.0);
    }
  }
}

TEST_CASE("per-packet energy and airtime fields are self-consistent") {
  SimConfig c = small_config("random", 19);
  SimEngine engine(c);
  std::vector<PacketRecord> trace;
  engine.run_episode(Phase::Test, &trace);
  for (const PacketRecord& r : trace) {
    CHECK(r.energy_mj == packet_energy_mj(r.params, r.toa_s));
    CHECK(r.toa_s ==
          doctest::Approx(time_on_air_s(r.payload_bytes, r.params, c.channel)).epsilon(1e-12));
  }
}

TEST_CASE("identical config and seed reproduce identical metrics") {
  for (const char* policy : {"random", "adr", "dlora-pdr"}) {
    const ExperimentResult a = run_experiment(small_config(policy, 23));
    const ExperimentResult b = run_experiment(small_config(policy, 23));
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].metrics.pdr == b.rows[i].metrics.pdr);
      CHECK(a.rows[i].metrics.ee == b.rows[i].metrics.ee);
      CHECK(a.rows[i].metrics.th == b.rows[i].metrics.th);
    }
    // Different seed moves the numbers.
    const ExperimentResult d = run_experiment(small_config(policy, 24));
    bool any_diff = false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      any_diff = any_diff || a.rows[i].metrics.pdr != d.rows[i].metrics.pdr;
    CHECK(any_diff);
  }
}

TEST_CASE("single-node PDR matches a closed-form Monte Carlo estimate") {
  // One node, fixed parameters, no contention: delivery is governed purely by
  // Eq.(3)/(6). Estimate P(RSSI >= RS and SINR >= threshold) with an
  // independent sampler (std <random>, different generator family) and
  // compare over 1e4 simulated packets.
  SimConfig c = singleton_domains(small_config("random", 29), 9, 125e3, 470.1e6, 8);
  c.n_nodes = 1;
  c.node_positions = {{600.0, 0.0}};
  c.packets_per_node_per_episode = 10000;
  c.lambda_pps = 10.0;
  SimEngine engine(c);
  const EpisodeResult ep = engine.run_episode(Phase::Test);

  const double mean_rssi = rssi_at_gateway_dbm({9, 125e3, 470.1e6, 8}, 600.0, 0.0, c.channel);
  const double rs = receiver_sensitivity_dbm(9, 125e3);
  const double thr = sinr_threshold_db(9);
  const double floor = thermal_noise_dbm(125e3, c.channel.noise_figure_db);

  std::mt19937_64 gen(12345);
  std::normal_distribution<double> shadow(0.0, c.channel.shadowing_sigma_db);
  std::normal_distribution<double> jitter(0.0, c.channel.noise_sigma_db);
  int hit = 0;
  const int trials = 1000000;
  for (int i = 0; i < trials; ++i) {
    const double rssi = mean_rssi - shadow(gen);
    const double sinr = rssi - (floor + jitter(gen));
    if (rssi >= rs && sinr >= thr) ++hit;
  }
  const double expected = static_cast<double>(hit) / trials;
  CHECK(std::fabs(ep.metrics.pdr - expected) <= 0.02);
}

TEST_CASE("M = 0 leaves the agent untrained: greedy ties pick the first arms") {
  SimConfig c = small_config("dlora-pdr", 31);
  c.n_nodes = 3;
  c.n_train_episodes = 0;
  c.n_test_episodes = 1;
  c.packets_per_node_per_episode = 10;
  SimEngine engine(c);
  std::vector<PacketRecord> trace;
  engine.run_episode(Phase::Test, &trace);
  for (const PacketRecord& r : trace) {
    CHECK(r.params.sf == c.domains.sf.front());
    CHECK(r.params.bw_hz == c.domains.bw_hz.front());
    CHECK(r.params.cf_hz == c.domains.cf_hz.front());
    CHECK(r.params.tp_dbm == c.domains.tp_dbm.front());
  }
}

TEST_CASE("agents keep learning across episodes and freeze in the test phase") {
  SimConfig c = small_config("dlora-pdr", 37);
  SimEngine engine(c);
  engine.run_episode(Phase::Training);
  const std::uint64_t pulls_after_one = engine.agents()[0].sf.t;
  CHECK(pulls_after_one == static_cast<std::uint64_t>(c.packets_per_node_per_episode));
  engine.run_episode(Phase::Training);
  CHECK(engine.agents()[0].sf.t == 2 * pulls_after_one);  // q-tables persist
  engine.run_episode(Phase::Test);
  CHECK(engine.agents()[0].sf.t == 2 * pulls_after_one);  // frozen during test
}

TEST_CASE("training improves D-LoRa-PDR delivery at the endpoints") {
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig c = small_config("dlora-pdr", seed);
    c.n_train_episodes = 12;
    c.n_test_episodes = 3;
    const ExperimentResult r = run_experiment(c);
    const double first = r.rows.front().metrics.pdr;
    double test_mean = 0.0;
    int test_count = 0;
    for (const EpisodeRow& row : r.rows)
      if (row.phase == Phase::Test) {
        test_mean += row.metrics.pdr;
        ++test_count;
      }
    test_mean /= test_count;
    if (test_mean > first) ++improved;
  }
  CHECK(improved >= 3);  // 5-seed majority
}

TEST_CASE("random policy learns nothing: train and test metrics agree") {
  std::vector<double> diffs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimConfig c = small_config("random", seed);
    const ExperimentResult r = run_experiment(c);
    double train = 0, test = 0;
    int n_train = 0, n_test = 0;
    for (const EpisodeRow& row : r.rows) {
      if (row.phase == Phase::Training) {
        train += row.metrics.pdr;
        ++n_train;
      } else {
        test += row.metrics.pdr;
        ++n_test;
      }
    }
    diffs.push_back(train / n_train - test / n_test);
  }
  CHECK(std::fabs(oracle::mean(diffs)) < 0.02);
}

TEST_CASE("config validation failures carry field names") {
  SimConfig c = small_config("random", 1);
  c.n_nodes = 0;
  CHECK_THROWS_WITH_AS(SimEngine{c}, doctest::Contains("n_nodes"), std::invalid_argument);

  SimConfig bad_domain = small_config("random", 1);
  bad_domain.domains.sf = {13};
  CHECK_THROWS_WITH_AS(SimEngine{bad_domain}, doctest::Contains("domains.sf"),
                       std::invalid_argument);

  SimConfig bad_pos = small_config("random", 1);
  bad_pos.node_positions = {{0.0, 0.0}};  // wrong length
  CHECK_THROWS_WITH_AS(SimEngine{bad_pos}, doctest::Contains("node_positions"),
                       std::invalid_argument);
}
