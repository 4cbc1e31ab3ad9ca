#include "civic/scenarios.hpp"

#include <algorithm>

#include <openssl/sha.h>

#include "civic/hex.hpp"

namespace civic {

using nlohmann::json;

nlohmann::json ScenarioConfig::to_json() const {
  return json{{"seed", seed},
              {"citizens", citizens},
              {"relying_parties", relying_parties},
              {"credentials_per_citizen", credentials_per_citizen},
              {"cheaters", cheaters},
              {"key_bits", key_bits},
              {"gossip_every_event", gossip_every_event},
              {"agents", agents},
              {"epochs", epochs},
              {"proximity_events", proximity_events},
              {"infected", infected}};
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  ScenarioConfig c;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("seed", c.seed);
  get("citizens", c.citizens);
  get("relying_parties", c.relying_parties);
  get("credentials_per_citizen", c.credentials_per_citizen);
  get("cheaters", c.cheaters);
  get("key_bits", c.key_bits);
  get("gossip_every_event", c.gossip_every_event);
  get("agents", c.agents);
  get("epochs", c.epochs);
  get("proximity_events", c.proximity_events);
  get("infected", c.infected);
  return c;
}

void ScenarioConfig::validate_transit() const {
  if (key_bits < 10 || key_bits > 64) throw InvalidConfig("key_bits must be in [10, 64]");
  if (cheaters > citizens) throw InvalidConfig("cheaters cannot exceed citizens");
  if (citizens > 0 && credentials_per_citizen > 0 && relying_parties == 0)
    throw InvalidConfig("presentations need at least one relying party");
  if (cheaters > 0 && credentials_per_citizen == 0)
    throw InvalidConfig("cheaters need at least one credential to replay");
}

void ScenarioConfig::validate_tracing() const {
  if (infected > agents) throw InvalidConfig("infected cannot exceed agents");
  if (proximity_events > 0 && epochs > 0 && agents < 2)
    throw InvalidConfig("proximity events need at least two agents");
}

nlohmann::json SimulationReport::to_json() const {
  return json{{"accepts", accepts},
              {"double_spend_rejects", double_spend_rejects},
              {"bad_signature_rejects", bad_signature_rejects},
              {"other_rejects", other_rejects},
              {"presentations_attempted", presentations_attempted}};
}

namespace {

// Fisher-Yates with our own uniform draw; std::shuffle's stream is
// implementation-defined.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniform_u64(rng, 0, i - 1)]);
}

BlindKeyPair generate_attribute_key(unsigned key_bits, const std::string& attribute_id,
                                    std::mt19937_64& rng) {
  unsigned prime_bits = key_bits / 2;
  for (;;) {
    u64 p = random_prime(prime_bits, rng);
    u64 q = random_prime(prime_bits, rng);
    if (p == q) continue;
    u64 lambda = carmichael_two_primes(p, q);
    for (u64 e : {3ull, 5ull, 7ull, 17ull, 257ull, 65537ull}) {
      if (e < lambda && std::gcd(e, lambda) == 1) return keygen(p, q, e, attribute_id);
    }
  }
}

}  // namespace

SimulationReport run_transit_scenario(const ScenarioConfig& config) {
  config.validate_transit();
  std::mt19937_64 rng(config.seed);
  SimulationReport report;

  const std::string issuer_name = "tax-office";
  const AttributeId transit_attr = "taxpayer:region-X";
  const AttributeId resident_attr = "resident:region-X";

  BlindKeyPair transit_key = generate_attribute_key(config.key_bits, transit_attr, rng);
  BlindKeyPair resident_key = generate_attribute_key(config.key_bits, resident_attr, rng);
  while (resident_key.n == transit_key.n)
    resident_key = generate_attribute_key(config.key_bits, resident_attr, rng);
  report.issuer_keys = {transit_key, resident_key};
  report.directory.publish(issuer_name, transit_attr, transit_key.public_key());
  report.directory.publish(issuer_name, resident_attr, resident_key.public_key());

  IssuerNode issuer(issuer_name, [](const std::string&, const AttributeId&) { return true; },
                    std::max(3u, config.credentials_per_citizen));
  issuer.add_key(transit_key);
  issuer.add_key(resident_key);

  std::vector<RelyingPartyNode> rps;
  rps.reserve(config.relying_parties);
  for (unsigned i = 0; i < config.relying_parties; ++i)
    rps.emplace_back("transit-rp-" + std::to_string(i), issuer_name, &report.directory);

  u64 tick = 0;
  auto gossip_round = [&]() {
    for (std::size_t i = 0; i < rps.size(); ++i)
      for (std::size_t j = i + 1; j < rps.size(); ++j) gossip_spent(rps[i], rps[j], tick);
    ++tick;
  };

  // Issuance phase: every citizen pre-fetches its credentials.
  std::vector<Wallet> wallets;
  wallets.reserve(config.citizens);
  std::vector<std::vector<Serial>> citizen_serials(config.citizens);
  for (unsigned c = 0; c < config.citizens; ++c) {
    wallets.emplace_back(rng());
    std::string session = "citizen-" + std::to_string(c);
    for (unsigned k = 0; k < config.credentials_per_citizen; ++k) {
      IssueRequest req = wallets[c].create_issue_request(issuer_name, transit_attr,
                                                         report.directory);
      Serial serial = wallets[c].pending().back().serial;
      IssueOutcome outcome = issuer.handle_issue_request(session, req, tick++);
      if (!outcome.ok) throw InvalidConfig("issuer denied an in-quota request");
      wallets[c].finalize_credential(serial, outcome.blinded_sig);
      citizen_serials[c].push_back(serial);
    }
  }

  // Presentation phase: seed-shuffled order, uniform relying-party choice.
  std::vector<std::pair<unsigned, Serial>> order;
  for (unsigned c = 0; c < config.citizens; ++c)
    for (const Serial& s : citizen_serials[c]) order.emplace_back(c, s);
  deterministic_shuffle(order, rng);

  std::vector<std::vector<Presentation>> consumed(config.citizens);
  auto tally = [&](const PresentResult& result) {
    ++report.presentations_attempted;
    if (result.accepted) {
      ++report.accepts;
    } else if (result.reason == RejectReason::DoubleSpend) {
      ++report.double_spend_rejects;
    } else if (result.reason == RejectReason::BadSignature) {
      ++report.bad_signature_rejects;
    } else {
      ++report.other_rejects;
    }
  };

  for (const auto& [c, serial] : order) {
    Presentation pres = wallets[c].take_for_presentation_serial(serial);
    consumed[c].push_back(pres);
    std::size_t rp_index = rps.size() > 1 ? uniform_u64(rng, 0, rps.size() - 1) : 0;
    tally(rps[rp_index].handle_presentation(pres, tick++));
    if (config.gossip_every_event) gossip_round();
  }

  // Cheaters replay one consumed presentation each.
  for (unsigned c = 0; c < config.cheaters; ++c) {
    const auto& mine = consumed[c];
    const Presentation& replay = mine[uniform_u64(rng, 0, mine.size() - 1)];
    report.replayed_serials.push_back(replay.serial);
    std::size_t rp_index = rps.size() > 1 ? uniform_u64(rng, 0, rps.size() - 1) : 0;
    tally(rps[rp_index].handle_presentation(replay, tick++));
    if (config.gossip_every_event) gossip_round();
  }

  report.transcripts[issuer.name()] = issuer.transcript();
  for (const RelyingPartyNode& rp : rps) report.transcripts[rp.name()] = rp.transcript();
  return report;
}

EphemeralToken rotate_ephemeral_id(const AgentSeed& agent_seed, u64 epoch) {
  std::uint8_t input[40];
  std::copy(agent_seed.begin(), agent_seed.end(), input);
  for (int i = 0; i < 8; ++i)
    input[32 + i] = static_cast<std::uint8_t>(epoch >> (8 * (7 - i)));
  std::uint8_t digest[SHA256_DIGEST_LENGTH];
  SHA256(input, sizeof(input), digest);
  EphemeralToken token;
  std::copy(digest, digest + 16, token.bytes.begin());
  token.epoch = epoch;
  return token;
}

std::set<u64> match_exposures(const std::vector<HeardToken>& heard,
                              const std::vector<AgentSeed>& published_seeds,
                              u64 window_start, u64 window_end) {
  for (std::size_t i = 1; i < heard.size(); ++i)
    if (heard[i].epoch < heard[i - 1].epoch) throw UnsortedInput();
  std::set<u64> matched;
  for (const HeardToken& h : heard) {
    if (h.epoch < window_start || h.epoch >= window_end) continue;
    for (const AgentSeed& seed : published_seeds) {
      if (rotate_ephemeral_id(seed, h.epoch).bytes == h.token) {
        matched.insert(h.epoch);
        break;
      }
    }
  }
  return matched;
}

nlohmann::json ExposureReport::to_json() const {
  json board = json::array();
  for (const AgentSeed& s : bulletin_board) board.push_back(bytes_to_hex(s));
  return json{{"infected_agents", infected_agents},
              {"exposed_agents", exposed_agents},
              {"bulletin_board", board},
              {"window_start", window_start},
              {"window_end", window_end}};
}

ExposureReport run_contact_tracing_scenario(const ScenarioConfig& config) {
  config.validate_tracing();
  std::mt19937_64 rng(config.seed);
  ExposureReport report;

  std::vector<AgentSeed> seeds(config.agents);
  for (AgentSeed& seed : seeds) {
    for (std::size_t i = 0; i < seed.size(); i += 8) {
      u64 word = rng();
      for (int b = 0; b < 8; ++b)
        seed[i + b] = static_cast<std::uint8_t>(word >> (8 * (7 - b)));
    }
  }

  std::vector<unsigned> agent_order(config.agents);
  for (unsigned i = 0; i < config.agents; ++i) agent_order[i] = i;
  deterministic_shuffle(agent_order, rng);
  report.infected_agents.assign(agent_order.begin(), agent_order.begin() + config.infected);
  std::sort(report.infected_agents.begin(), report.infected_agents.end());

  // Tokens are exchanged on each sampled proximity event; each agent keeps
  // only its own time-sorted heard list.
  std::vector<std::vector<HeardToken>> heard(config.agents);
  for (u64 epoch = 0; epoch < config.epochs; ++epoch) {
    for (unsigned j = 0; j < config.proximity_events; ++j) {
      unsigned a = static_cast<unsigned>(uniform_u64(rng, 0, config.agents - 1));
      unsigned b = a;
      while (b == a) b = static_cast<unsigned>(uniform_u64(rng, 0, config.agents - 1));
      report.ground_truth_events.push_back({epoch, a, b});
      heard[a].push_back({epoch, rotate_ephemeral_id(seeds[b], epoch).bytes});
      heard[b].push_back({epoch, rotate_ephemeral_id(seeds[a], epoch).bytes});
    }
  }

  report.window_end = config.epochs;
  report.window_start =
      config.epochs > kInfectiousWindowEpochs ? config.epochs - kInfectiousWindowEpochs : 0;

  // Infected agents publish their seed; matching happens on every device.
  for (unsigned a : report.infected_agents) report.bulletin_board.push_back(seeds[a]);

  for (unsigned a = 0; a < config.agents; ++a) {
    std::set<u64> matched = match_exposures(heard[a], report.bulletin_board,
                                            report.window_start, report.window_end);
    if (!matched.empty()) report.exposed_agents.push_back(a);
  }
  return report;
}

}  // namespace civic
