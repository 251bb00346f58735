// grouprec: replay, simulate, compare and serve.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "grouprec/grouprec.hpp"
#include "grouprec/http_api.hpp"

namespace {

using namespace grouprec;

struct Common {
  std::string config_path;
  std::string out_dir;
  std::string format = "text";
};

Config load(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
  apply_env_overrides(cfg);
  return cfg;
}

void emit(const Common& c, const std::string& file, const std::string& content) {
  if (c.out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(c.out_dir);
  const auto path = std::filesystem::path(c.out_dir) / file;
  std::ofstream out(path);
  out << content;
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
}

std::string render(const Common& c, const Json& report) {
  return c.format == "machine" ? report.dump(2) + "\n" : render_text(report);
}

std::string ext(const Common& c) { return c.format == "machine" ? ".json" : ".txt"; }

int run_replay(const Common& c, const std::string& log) {
  const auto run = replay_file(log, load(c));
  emit(c, "report" + ext(c), render(c, replay_report(run)));
  return 0;
}

int run_compare(const Common& c, const std::string& log) {
  const auto run = replay_file(log, load(c));
  const auto report = compare_report(run);
  if (c.format == "machine") emit(c, "compare.json", report.dump(2) + "\n");
  else emit(c, "compare.tsv", render_compare_text(report));
  return 0;
}

int run_simulate(const Common& c, const std::string& personas, double duration_s, std::uint64_t seed) {
  const Config cfg = load(c);
  SimulationOptions opt;
  opt.seed = seed;
  opt.duration_ms = static_cast<Millis>(duration_s * 1000.0);
  opt.bookmarking_ms = cfg.session.bookmarking_ms;
  std::vector<SessionView> views;
  Session s(cfg.session, cfg.make_scorer(), cfg.make_resolver());
  s.on_view([&views](const SessionView& v) { views.push_back(v); });
  views.push_back(s.view());
  SessionTarget target(s);
  Simulator(load_personas(personas), opt).run(target);

  std::ostringstream log;
  log << "# grouprec-log lexicon=" << s.scorer().version() << " resolver=" << s.resolver().name()
      << " seed=" << seed << '\n';
  eventlog::write(log, s.log());
  ReplayRun run{std::move(s), std::move(views)};
  const std::string report = render(c, replay_report(run));
  if (c.out_dir.empty()) {
    std::cout << log.str() << report;
  } else {
    emit(c, "session.log", log.str());
    emit(c, "report" + ext(c), report);
  }
  return 0;
}

int run_serve(const Common& c) {
  Config cfg = load(c);
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SessionService service(cfg);
  service.start_ticker();
  HttpApi api(service);
  std::thread server([&] {
    if (!api.listen(cfg.server.host, cfg.server.port)) {
      std::cerr << "error: cannot listen on " << cfg.server.host << ":" << cfg.server.port << "\n";
      kill(getpid(), SIGTERM);
    }
  });
  std::cerr << "listening on " << cfg.server.host << ":" << cfg.server.port << ", data in "
            << cfg.server.data_dir << "\n";
  int sig = 0;
  sigwait(&signals, &sig);
  api.stop();
  server.join();
  service.stop_ticker();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-aware group restaurant recommendation"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "write outputs into this directory");
    sub->add_option("--format", common.format, "output format")->check(CLI::IsMember({"text", "machine"}));
  };

  std::string log_path;
  auto* replay = app.add_subcommand("replay", "replay a session log and print the report");
  replay->add_option("log", log_path, "event log")->required();
  add_common(replay);

  auto* compare = app.add_subcommand("compare", "per-tick proposed vs baseline table");
  compare->add_option("log", log_path, "event log")->required();
  add_common(compare);

  std::string personas;
  double duration = 1800;
  std::uint64_t seed = 1;
  auto* simulate = app.add_subcommand("simulate", "simulate a session from personas");
  simulate->add_option("--personas", personas, "persona file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--duration", duration, "session length in seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "random seed");
  add_common(simulate);

  auto* serve = app.add_subcommand("serve", "run the HTTP session service");
  add_common(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*replay) return run_replay(common, log_path);
    if (*compare) return run_compare(common, log_path);
    if (*simulate) return run_simulate(common, personas, duration, seed);
    if (*serve) return run_serve(common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
