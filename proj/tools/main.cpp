// gruebench command line: experiment runner, world validator, oracle and
// knowledge-graph tooling for the exploration workbench.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "grue/admissible.hpp"
#include "grue/harness.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 1 usage, 2 validation failure, 3 runtime fault.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kFault = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw grue::ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw grue::ConfigError("cannot write file: " + path.string());
  out << content;
}

std::vector<std::uint8_t> read_blob(const std::string& path) {
  std::string s = read_file(path);
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

void write_blob(const fs::path& path, const std::vector<std::uint8_t>& blob) {
  write_file(path, std::string(blob.begin(), blob.end()));
}

std::string default_out_dir() {
  const char* env = std::getenv("GRUEBENCH_OUT");
  return env ? env : "out";
}

// "open mailbox; take egg" -> actions, replayed from reset.
std::pair<grue::GameState, grue::KnowledgeGraph> replay_script(const grue::WorldSpec& world,
                                                               const std::string& script) {
  auto [state, obs] = grue::engine::reset(world);
  grue::KnowledgeGraph graph = grue::kg::update_graph({}, obs.text, std::nullopt, world, state);
  std::stringstream ss(script);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.find_first_not_of(" \t\n") == std::string::npos) continue;
    grue::TemplateAction action = grue::parse(part, world.vocab, world.templates);
    auto [next, o] = grue::engine::step(world, state, action);
    state = std::move(next);
    obs = std::move(o);
    graph = grue::kg::update_graph(graph, obs.text, action, world, state);
  }
  return {std::move(state), std::move(graph)};
}

json record_to_json(const grue::RunRecord& rec, std::int64_t bottleneck_score) {
  json j;
  j["agent"] = grue::agent_name(rec.agent);
  j["seed"] = rec.seed;
  std::ostringstream digest;
  digest << std::hex << rec.config_digest;
  j["config_digest"] = digest.str();
  j["series"] = rec.series;
  j["max_score"] = rec.max_score;
  j["asymptotic_score"] = rec.asymptotic_score;
  j["terminal_event"] = rec.terminal_event;
  j["total_env_steps"] = rec.total_env_steps;
  j["wall_seconds"] = rec.wall_seconds;
  j["bottleneck_score"] = bottleneck_score;
  return j;
}

grue::RunRecord record_from_json(const json& j) {
  grue::RunRecord rec;
  rec.agent = grue::agent_from_name(j.at("agent").get<std::string>());
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.config_digest = std::stoull(j.at("config_digest").get<std::string>(), nullptr, 16);
  rec.series = j.at("series").get<std::vector<std::int64_t>>();
  rec.max_score = j.at("max_score").get<std::int64_t>();
  rec.asymptotic_score = j.at("asymptotic_score").get<double>();
  rec.terminal_event = j.at("terminal_event").get<std::string>();
  rec.total_env_steps = j.at("total_env_steps").get<std::int64_t>();
  rec.wall_seconds = j.at("wall_seconds").get<double>();
  return rec;
}

int cmd_run(const std::string& config_path, const std::string& agent_override,
            const std::string& seeds_override, std::int64_t budget_override,
            const std::string& out_dir, bool save_params) {
  grue::ExperimentConfig config = grue::load_config_file(config_path);
  if (!agent_override.empty()) config.agent = grue::agent_from_name(agent_override);
  if (!seeds_override.empty()) {
    config.seeds.clear();
    std::stringstream ss(seeds_override);
    std::string part;
    while (std::getline(ss, part, ',')) config.seeds.push_back(std::stoull(part));
  }
  if (budget_override > 0) config.step_budget = budget_override;
  if (config.world_path.empty()) throw grue::ConfigError("config has no world path");
  // World paths resolve relative to the config file.
  fs::path world_path = config.world_path;
  if (world_path.is_relative()) world_path = fs::path(config_path).parent_path() / world_path;
  config.world_text = read_file(world_path.string());
  config.validate();

  std::vector<grue::RunRecord> records = grue::run_experiment(config);
  const fs::path out(out_dir);
  for (const grue::RunRecord& rec : records) {
    std::string stem = std::string(grue::agent_name(rec.agent)) + "_seed" + std::to_string(rec.seed);
    std::string log;
    for (const std::string& line : rec.log_lines) log += line + "\n";
    write_file(out / (stem + ".jsonl"), log);
    write_file(out / (stem + ".curve.csv"), grue::curve_csv(rec));
    write_file(out / (stem + ".record.json"), record_to_json(rec, config.bottleneck_score).dump(2) + "\n");
    if (save_params) write_blob(out / (stem + ".params.bin"), grue::save_params(rec.final_params));
    std::cout << stem << ": max_score=" << rec.max_score
              << " asymptotic=" << rec.asymptotic_score << " event=" << rec.terminal_event
              << " env_steps=" << rec.total_env_steps << "\n";
  }
  std::cout << "wrote " << records.size() << " run(s) to " << out.string() << "\n";
  return kOk;
}

int cmd_report(const std::string& in_dir, const std::string& out_file) {
  std::vector<grue::RunRecord> records;
  std::int64_t bottleneck = 0;
  for (const auto& entry : fs::directory_iterator(in_dir)) {
    if (entry.path().extension() != ".json") continue;
    if (entry.path().string().find(".record.json") == std::string::npos) continue;
    json j = json::parse(read_file(entry.path().string()));
    bottleneck = j.value("bottleneck_score", bottleneck);
    records.push_back(record_from_json(j));
  }
  if (records.empty()) throw grue::ConfigError("no .record.json files in " + in_dir);
  std::sort(records.begin(), records.end(), [](const grue::RunRecord& a, const grue::RunRecord& b) {
    if (a.agent != b.agent) return a.agent < b.agent;
    return a.seed < b.seed;
  });
  std::string table = grue::report_table(records, bottleneck);
  if (out_file.empty()) {
    std::cout << table;
  } else {
    write_file(out_file, table);
    std::cout << "wrote " << out_file << "\n";
  }
  return kOk;
}

int cmd_validate(const std::string& world_path) {
  grue::ValidationReport report = grue::validate_world(read_file(world_path));
  for (const std::string& e : report.errors) std::cout << "error: " << e << "\n";
  for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
  if (report.ok()) {
    std::cout << "valid"
              << (report.warnings.empty() ? ", all rewards reachable" : " with warnings") << "\n";
    return kOk;
  }
  return kValidation;
}

int cmd_oracle(const std::string& world_path, const std::string& script) {
  grue::WorldSpec world = grue::load_world(read_file(world_path));
  auto [state, graph] = replay_script(world, script);
  (void)graph;
  for (const grue::TemplateAction& a : grue::admissible_actions(world, state))
    std::cout << grue::render(a, world.vocab, world.templates) << "\n";
  return kOk;
}

int cmd_kg_dump(const std::string& world_path, const std::string& script) {
  grue::WorldSpec world = grue::load_world(read_file(world_path));
  auto [state, graph] = replay_script(world, script);
  (void)state;
  std::cout << grue::kg::dump(graph);
  return kOk;
}

int cmd_archive_inspect(const std::string& archive_path, const std::string& world_path) {
  grue::WorldSpec world = grue::load_world(read_file(world_path));
  auto [archive, variant] = grue::load_archive(read_blob(archive_path));
  (void)variant;
  std::cout << grue::inspect_archive(archive, world);
  return kOk;
}

int cmd_resume(const std::string& config_path, const std::string& params_path,
               std::uint64_t seed, std::int64_t budget, const std::string& out_dir) {
  grue::ExperimentConfig config = grue::load_config_file(config_path);
  fs::path world_path = config.world_path;
  if (world_path.is_relative()) world_path = fs::path(config_path).parent_path() / world_path;
  config.world_text = read_file(world_path.string());
  if (budget > 0) config.step_budget = budget;
  config.validate();
  grue::WorldSpec world = grue::load_world(config.world_text);
  grue::AgentSpec spec = grue::AgentSpec::make(world, config.bow_dim);
  grue::PolicyParams params = grue::load_params(read_blob(params_path));
  grue::PlainRunResult r = grue::train_plain(world, spec, config.training(true),
                                             grue::agent_variant(config.agent), seed,
                                             config.step_budget, &params);
  const fs::path out(out_dir);
  std::string stem = std::string(grue::agent_name(config.agent)) + "_resumed_seed" + std::to_string(seed);
  write_blob(out / (stem + ".params.bin"), grue::save_params(r.params));
  std::cout << stem << ": best_score=" << r.best_score << " event=" << r.termination
            << " env_steps=" << r.total_env_steps << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gruebench: exploration strategies for template-action text games"};
  app.require_subcommand(1);

  std::string config_path, agent, seeds, out_dir = default_out_dir();
  std::int64_t budget = 0;
  bool save_params = false;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--agent", agent, "override the configured agent");
  run->add_option("--seeds", seeds, "comma-separated seed list override");
  run->add_option("--budget", budget, "step budget override");
  run->add_option("--out", out_dir, "output directory (env GRUEBENCH_OUT)");
  run->add_flag("--save-params", save_params, "write final parameter checkpoints");

  std::string report_in, report_out;
  CLI::App* report = app.add_subcommand("report", "aggregate run records into the ablation table");
  report->add_option("dir", report_in, "directory of .record.json files")->required();
  report->add_option("--out", report_out, "write the CSV table here instead of stdout");

  std::string world_path;
  CLI::App* validate = app.add_subcommand("validate", "validate a world file");
  validate->add_option("world", world_path, "world file")->required();

  std::string oracle_world, oracle_script;
  CLI::App* oracle = app.add_subcommand("oracle", "print admissible actions at a scripted state");
  oracle->add_option("world", oracle_world, "world file")->required();
  oracle->add_option("--script", oracle_script, "semicolon-separated actions from reset");

  CLI::App* kg = app.add_subcommand("kg", "knowledge graph tools");
  kg->require_subcommand(1);
  std::string kg_world, kg_script;
  CLI::App* kg_dump = kg->add_subcommand("dump", "dump the graph after a scripted walkthrough");
  kg_dump->add_option("world", kg_world, "world file")->required();
  kg_dump->add_option("--script", kg_script, "semicolon-separated actions from reset");

  CLI::App* archive = app.add_subcommand("archive", "cell archive tools");
  archive->require_subcommand(1);
  std::string archive_path, archive_world;
  CLI::App* inspect = archive->add_subcommand("inspect", "print a checkpointed archive");
  inspect->add_option("checkpoint", archive_path, "archive checkpoint file")->required();
  inspect->add_option("world", archive_world, "world file")->required();

  std::string resume_config, resume_params;
  std::uint64_t resume_seed = 0;
  std::int64_t resume_budget = 0;
  std::string resume_out = default_out_dir();
  CLI::App* resume = app.add_subcommand("resume", "continue training from a parameter checkpoint");
  resume->add_option("config", resume_config, "JSON experiment config")->required();
  resume->add_option("params", resume_params, "parameter checkpoint")->required();
  resume->add_option("--seed", resume_seed, "seed");
  resume->add_option("--budget", resume_budget, "step budget override");
  resume->add_option("--out", resume_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, agent, seeds, budget, out_dir, save_params);
    if (report->parsed()) return cmd_report(report_in, report_out);
    if (validate->parsed()) return cmd_validate(world_path);
    if (oracle->parsed()) return cmd_oracle(oracle_world, oracle_script);
    if (kg->parsed()) return cmd_kg_dump(kg_world, kg_script);
    if (archive->parsed()) return cmd_archive_inspect(archive_path, archive_world);
    if (resume->parsed()) return cmd_resume(resume_config, resume_params, resume_seed,
                                            resume_budget, resume_out);
  } catch (const grue::WorldError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const grue::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const grue::ParseError& e) {
    std::cerr << "action parse error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "fault: " << e.what() << "\n";
    return kFault;
  }
  return kUsage;
}
