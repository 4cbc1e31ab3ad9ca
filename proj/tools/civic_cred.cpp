// civic-cred: key generation, scenario demos, and transcript audits.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "civic/auditor.hpp"
#include "civic/hex.hpp"
#include "civic/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace civic;

namespace {

// Write-then-rename so a crashed run never leaves a half-written file.
void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

u64 default_seed() {
  const char* env = std::getenv("CIVIC_CRED_SEED");
  if (!env) return 0;
  char* end = nullptr;
  u64 v = std::strtoull(env, &end, 10);
  return (end && *end == '\0') ? v : 0;
}

void write_transcripts(const fs::path& dir,
                       const std::map<std::string, std::vector<TranscriptEvent>>& transcripts) {
  fs::create_directories(dir / "transcripts");
  for (const auto& [node, events] : transcripts) {
    std::ostringstream lines;
    for (const TranscriptEvent& ev : events) lines << ev.to_json().dump() << "\n";
    write_file_atomic(dir / "transcripts" / (node + ".jsonl"), lines.str());
  }
}

std::map<std::string, std::vector<TranscriptEvent>> read_transcripts(const fs::path& dir) {
  std::map<std::string, std::vector<TranscriptEvent>> transcripts;
  fs::path tdir = dir / "transcripts";
  if (!fs::is_directory(tdir)) throw std::runtime_error("no transcripts/ under " + dir.string());
  for (const auto& entry : fs::directory_iterator(tdir)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::string node = entry.path().stem().string();
    std::istringstream in(read_file(entry.path()));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      transcripts[node].push_back(TranscriptEvent::from_json(json::parse(line)));
    }
  }
  return transcripts;
}

int run_keygen(const std::string& issuer, const std::string& attribute, unsigned bits,
               u64 seed, const std::string& out, const std::string& secret_out) {
  std::mt19937_64 rng(seed);
  unsigned prime_bits = bits / 2;
  BlindKeyPair key;
  for (;;) {
    u64 p = random_prime(prime_bits, rng);
    u64 q = random_prime(prime_bits, rng);
    if (p == q) continue;
    u64 lambda = carmichael_two_primes(p, q);
    u64 e = 0;
    for (u64 cand : {3ull, 5ull, 7ull, 17ull, 257ull, 65537ull})
      if (cand < lambda && std::gcd(cand, lambda) == 1) {
        e = cand;
        break;
      }
    if (e == 0) continue;
    key = keygen(p, q, e, attribute);
    break;
  }
  AttributeKeyDirectory directory;
  directory.publish(issuer, attribute, key.public_key());
  write_file_atomic(out, directory_to_json(directory).dump(2) + "\n");
  if (!secret_out.empty())
    write_file_atomic(secret_out, signing_keys_to_json({key}).dump(2) + "\n");
  std::cout << "wrote " << out << " (n=" << u64_to_hex(key.n) << ", e=" << u64_to_hex(key.e)
            << ")\n";
  return 0;
}

int run_demo_transit(const ScenarioConfig& config, const fs::path& out_dir) {
  SimulationReport report = run_transit_scenario(config);
  fs::create_directories(out_dir);
  json report_json = report.to_json();
  report_json["config"] = config.to_json();
  write_file_atomic(out_dir / "report.json", report_json.dump(2) + "\n");
  write_file_atomic(out_dir / "directory.json",
                    directory_to_json(report.directory).dump(2) + "\n");
  write_file_atomic(out_dir / "issuer_keys.json",
                    signing_keys_to_json(report.issuer_keys).dump(2) + "\n");
  write_transcripts(out_dir, report.transcripts);
  std::cout << "accepts=" << report.accepts
            << " double_spend_rejects=" << report.double_spend_rejects
            << " bad_signature_rejects=" << report.bad_signature_rejects << "\n";
  return 0;
}

int run_demo_tracing(const ScenarioConfig& config, const fs::path& out_dir) {
  ExposureReport report = run_contact_tracing_scenario(config);
  fs::create_directories(out_dir);
  json report_json = report.to_json();
  report_json["config"] = config.to_json();
  write_file_atomic(out_dir / "report.json", report_json.dump(2) + "\n");
  std::cout << "infected=" << report.infected_agents.size()
            << " exposed=" << report.exposed_agents.size() << "\n";
  return 0;
}

int run_audit(const fs::path& run_dir, bool strict, const std::string& mode_name, u64 seed,
              u64 trials) {
  AttributeKeyDirectory directory =
      directory_from_json(json::parse(read_file(run_dir / "directory.json")));
  std::vector<BlindKeyPair> signing_keys;
  if (fs::exists(run_dir / "issuer_keys.json"))
    signing_keys = signing_keys_from_json(json::parse(read_file(run_dir / "issuer_keys.json")));
  auto transcripts = read_transcripts(run_dir);

  // Issuer transcripts carry issue/deny events; everything else is a
  // relying party.
  std::vector<TranscriptEvent> issuer_transcript;
  std::vector<std::vector<TranscriptEvent>> rp_transcripts;
  for (const auto& [node, events] : transcripts) {
    bool is_issuer = false;
    for (const TranscriptEvent& ev : events)
      if (ev.kind == "issue" || ev.kind == "deny") is_issuer = true;
    if (is_issuer)
      issuer_transcript.insert(issuer_transcript.end(), events.begin(), events.end());
    else
      rp_transcripts.push_back(events);
  }

  AuditReport report;
  for (const auto& [pair, pub] : directory.entries()) {
    MatrixMode mode = MatrixMode::Exhaustive;
    if (mode_name == "algebraic" || (mode_name == "auto" && pub.n > kMaxExhaustiveModulus))
      mode = MatrixMode::Algebraic;
    ConsistencyMatrix matrix = consistency_matrix(issuer_transcript, rp_transcripts, pub, mode);
    report.anonymity_set_sizes[pair.second] = anonymity_set_sizes(matrix);
    report.issuance_counts[pair.second] = matrix.rows();
  }
  report.leaks = metadata_leak_scan(transcripts, default_transcript_schemas());
  std::size_t attribute_count = directory.entries().size();
  if (attribute_count >= 2) {
    std::mt19937_64 rng(seed);
    report.key_separation = key_separation_check(directory, signing_keys, trials, rng);
    report.key_separation_ran = true;
  }
  report.double_spend = double_spend_audit(rp_transcripts);

  write_file_atomic(run_dir / "audit.json", report.to_json().dump(2) + "\n");
  std::cout << report.summary_table();
  bool clean = report.leaks.empty() && (!report.key_separation_ran || report.key_separation.ok());
  return (strict && !clean) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privacy-preserving single-use credential toolkit"};
  app.require_subcommand(1);

  u64 seed = default_seed();

  auto* keygen_cmd = app.add_subcommand("keygen", "generate an attribute key directory entry");
  std::string kg_issuer, kg_attribute, kg_out = "directory.json", kg_secret_out;
  unsigned kg_bits = 16;
  keygen_cmd->add_option("--issuer", kg_issuer, "issuer name")->required();
  keygen_cmd->add_option("--attribute", kg_attribute, "attribute id")->required();
  keygen_cmd->add_option("--bits", kg_bits, "modulus size in bits")
      ->check(CLI::Range(10u, 64u));
  keygen_cmd->add_option("--seed", seed, "rng seed");
  keygen_cmd->add_option("--out", kg_out, "directory file to write");
  keygen_cmd->add_option("--secret-out", kg_secret_out, "also write the signing key here");

  ScenarioConfig config;
  std::string config_path, out_dir = "run";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "rng seed (env CIVIC_CRED_SEED is the fallback)");
    cmd->add_option("--config", config_path, "scenario config JSON; explicit flags win");
    cmd->add_option("--out", out_dir, "output directory");
  };

  auto* transit_cmd = app.add_subcommand("demo-transit", "run the transit-discount scenario");
  add_common(transit_cmd);
  auto* o_citizens = transit_cmd->add_option("--citizens", config.citizens, "number of citizens");
  auto* o_rps = transit_cmd->add_option("--rps", config.relying_parties, "relying parties");
  auto* o_per = transit_cmd->add_option("--per-citizen", config.credentials_per_citizen,
                                        "credentials per citizen");
  auto* o_cheaters = transit_cmd->add_option("--cheaters", config.cheaters,
                                             "citizens that replay a spent credential");
  auto* o_bits = transit_cmd->add_option("--bits", config.key_bits, "modulus size in bits");
  auto* o_gossip =
      transit_cmd->add_flag("--no-gossip", "disable spent-set gossip (opens the race window)");

  auto* tracing_cmd = app.add_subcommand("demo-tracing", "run the contact-tracing scenario");
  add_common(tracing_cmd);
  auto* o_agents = tracing_cmd->add_option("--agents", config.agents, "number of agents");
  auto* o_epochs = tracing_cmd->add_option("--epochs", config.epochs, "timeline length");
  auto* o_events = tracing_cmd->add_option("--events", config.proximity_events,
                                           "proximity events per epoch");
  auto* o_infected = tracing_cmd->add_option("--infected", config.infected, "infected agents");

  auto* audit_cmd = app.add_subcommand("audit", "audit a scenario run directory");
  std::string audit_dir, audit_mode = "auto";
  bool strict = false;
  u64 audit_trials = 1000;
  audit_cmd->add_option("dir", audit_dir, "run directory")->required();
  audit_cmd->add_flag("--strict", strict, "exit 1 on any finding");
  audit_cmd->add_option("--mode", audit_mode, "consistency matrix mode")
      ->check(CLI::IsMember({"auto", "exhaustive", "algebraic"}));
  audit_cmd->add_option("--trials", audit_trials, "key-separation Monte-Carlo trials");
  audit_cmd->add_option("--seed", seed, "rng seed for the statistical checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (keygen_cmd->parsed())
      return run_keygen(kg_issuer, kg_attribute, kg_bits, seed, kg_out, kg_secret_out);

    if (transit_cmd->parsed() || tracing_cmd->parsed()) {
      CLI::App* cmd = transit_cmd->parsed() ? transit_cmd : tracing_cmd;
      if (!config_path.empty()) {
        ScenarioConfig from_file =
            ScenarioConfig::from_json(json::parse(read_file(config_path)));
        // Explicit flags override config-file values.
        ScenarioConfig flags = config;
        config = from_file;
        if (o_citizens->count()) config.citizens = flags.citizens;
        if (o_rps->count()) config.relying_parties = flags.relying_parties;
        if (o_per->count()) config.credentials_per_citizen = flags.credentials_per_citizen;
        if (o_cheaters->count()) config.cheaters = flags.cheaters;
        if (o_bits->count()) config.key_bits = flags.key_bits;
        if (o_agents->count()) config.agents = flags.agents;
        if (o_epochs->count()) config.epochs = flags.epochs;
        if (o_events->count()) config.proximity_events = flags.proximity_events;
        if (o_infected->count()) config.infected = flags.infected;
        if (cmd->count("--seed")) config.seed = seed;
      } else {
        config.seed = seed;
      }
      if (o_gossip->count()) config.gossip_every_event = false;
      return transit_cmd->parsed() ? run_demo_transit(config, out_dir)
                                   : run_demo_tracing(config, out_dir);
    }

    return run_audit(audit_dir, strict, audit_mode, seed, audit_trials);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
