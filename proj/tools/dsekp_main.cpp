// Command-line front end: run one experiment, replay an attack scenario
// against it, or compare two finished runs.
//
// Exit codes: 0 success, 2 configuration or I/O problem, 3 invariant
// violation detected mid-run.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "dsekp/adversary.hpp"
#include "dsekp/metrics.hpp"
#include "dsekp/runner.hpp"

namespace {

struct ProfileFlags {
    std::string mode = "dsekp";
    dsekp::runner::RunProfile profile;
    std::string out_dir = "out";
    uint32_t reboot_every = 0;  // 0 = unset
    std::string profile_file;
};

// --- profile files -------------------------------------------------------
// Plain key=value lines, '#' comments. Keys mirror the long flags without
// the dashes. Explicit command-line flags always win over file values.

std::string trim(const std::string& s) {
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::map<std::string, std::string> read_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("profile file " + path + " line " +
                                        std::to_string(lineno) + ": expected key=value");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("profile file " + path + " line " +
                                        std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("profile file " + path + " repeats key " + key);
    }
    return kv;
}

uint64_t profile_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("profile key " + key + " needs an unsigned integer, got '" +
                                    value + "'");
    }
}

uint32_t profile_u32(const std::string& key, const std::string& value) {
    uint64_t v = profile_u64(key, value);
    if (v > UINT32_MAX)
        throw std::invalid_argument("profile key " + key + " is out of range: " + value);
    return static_cast<uint32_t>(v);
}

double profile_f64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("profile key " + key + " needs a number, got '" + value +
                                    "'");
    }
}

void apply_profile_file(const CLI::App* cmd, ProfileFlags& f) {
    auto kv = read_profile_file(f.profile_file);
    auto take = [&](const char* key, const char* flag, auto&& apply) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        if (cmd->count(flag) == 0) apply(it->second);
        kv.erase(it);
    };
    take("mode", "--mode", [&](const std::string& v) { f.mode = v; });
    take("packets", "--packets",
         [&](const std::string& v) { f.profile.packets = profile_u32("packets", v); });
    take("interval-ms", "--interval-ms",
         [&](const std::string& v) { f.profile.interval_ms = profile_u32("interval-ms", v); });
    take("devices", "--devices",
         [&](const std::string& v) { f.profile.devices = profile_u32("devices", v); });
    take("seed", "--seed",
         [&](const std::string& v) { f.profile.seed = profile_u64("seed", v); });
    take("latency-base-ms", "--latency-base-ms", [&](const std::string& v) {
        f.profile.latency_base_ms = profile_f64("latency-base-ms", v);
    });
    take("latency-jitter-ms", "--latency-jitter-ms", [&](const std::string& v) {
        f.profile.latency_jitter_ms = profile_f64("latency-jitter-ms", v);
    });
    take("loss", "--loss",
         [&](const std::string& v) { f.profile.loss = profile_f64("loss", v); });
    take("dup", "--dup", [&](const std::string& v) { f.profile.dup = profile_f64("dup", v); });
    take("reboot-every", "--reboot-every",
         [&](const std::string& v) { f.reboot_every = profile_u32("reboot-every", v); });
    take("ack-timeout-ms", "--ack-timeout-ms", [&](const std::string& v) {
        f.profile.ack_timeout_ms = profile_u32("ack-timeout-ms", v);
    });
    take("max-init-retries", "--max-init-retries", [&](const std::string& v) {
        f.profile.max_init_retries = profile_u32("max-init-retries", v);
    });
    take("session-timeout-s", "--session-timeout-s", [&](const std::string& v) {
        f.profile.session_timeout_s = profile_u64("session-timeout-s", v);
    });
    take("out", "--out", [&](const std::string& v) { f.out_dir = v; });
    if (!kv.empty())
        throw std::invalid_argument("profile file has an unknown key: " + kv.begin()->first);
}

void add_profile_flags(CLI::App* cmd, ProfileFlags& f) {
    cmd->add_option("--mode", f.mode, "protocol variant: psk or dsekp")
        ->check(CLI::IsMember({"psk", "dsekp"}))
        ->capture_default_str();
    cmd->add_option("--packets", f.profile.packets, "data packets per device")
        ->capture_default_str();
    cmd->add_option("--interval-ms", f.profile.interval_ms, "gap between readings")
        ->capture_default_str();
    cmd->add_option("--devices", f.profile.devices, "number of simulated devices")
        ->capture_default_str();
    cmd->add_option("--seed", f.profile.seed, "root seed; same profile + seed = same bytes")
        ->capture_default_str();
    cmd->add_option("--latency-base-ms", f.profile.latency_base_ms, "network base latency")
        ->capture_default_str();
    cmd->add_option("--latency-jitter-ms", f.profile.latency_jitter_ms,
                    "gaussian latency jitter std-dev")
        ->capture_default_str();
    cmd->add_option("--loss", f.profile.loss, "drop probability per publish")
        ->capture_default_str();
    cmd->add_option("--dup", f.profile.dup, "duplication probability per publish")
        ->capture_default_str();
    cmd->add_option("--reboot-every", f.reboot_every,
                    "power-cycle the device after every k packets (0 = never)");
    cmd->add_option("--ack-timeout-ms", f.profile.ack_timeout_ms,
                    "handshake ack timeout before a resend")
        ->capture_default_str();
    cmd->add_option("--max-init-retries", f.profile.max_init_retries,
                    "resends before drawing fresh session parameters")
        ->capture_default_str();
    cmd->add_option("--session-timeout-s", f.profile.session_timeout_s,
                    "rotate the session after this long (ignored with --reboot-every)")
        ->capture_default_str();
    cmd->add_option("--out", f.out_dir, "artifact directory")->capture_default_str();
    cmd->add_option("--profile", f.profile_file,
                    "key=value profile file; explicit flags override it");
}

dsekp::runner::RunProfile finalize(const CLI::App* cmd, ProfileFlags& f) {
    if (!f.profile_file.empty()) apply_profile_file(cmd, f);
    auto mode = dsekp::runner::parse_mode(f.mode);
    if (!mode) throw std::invalid_argument("unknown mode '" + f.mode + "', want psk or dsekp");
    f.profile.mode = *mode;
    if (f.reboot_every > 0) f.profile.reboot_every = f.reboot_every;
    f.profile.validate();
    return f.profile;
}

void print_run_digest(const dsekp::runner::RunProfile& p,
                      const dsekp::runner::RunArtifacts& art, const std::string& out_dir) {
    std::printf("mode=%s packets_sent=%llu accepted=%llu inits=%llu acks_ok=%llu\n",
                dsekp::runner::to_string(p.mode),
                static_cast<unsigned long long>(art.counters.data_sent),
                static_cast<unsigned long long>(art.counters.accepted_unique),
                static_cast<unsigned long long>(art.counters.inits_sent),
                static_cast<unsigned long long>(art.counters.acks_ok));
    if (!art.quiescent)
        std::printf("warning: run hit the safety horizon before going quiescent\n");
    std::printf("artifacts: %s\n", out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"per-session rekeying vs a static key, on a simulated broker"};
    app.require_subcommand(1);

    ProfileFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "simulate one variant end to end");
    add_profile_flags(run_cmd, run_flags);

    ProfileFlags attack_flags;
    std::string scenario_name;
    uint32_t attack_count = 1000;
    CLI::App* attack_cmd =
        app.add_subcommand("attack", "run a variant with an active adversary");
    add_profile_flags(attack_cmd, attack_flags);
    attack_cmd
        ->add_option("--scenario", scenario_name,
                     "replay_data, replay_init, tamper_bitflip, forge_init, "
                     "cross_session_splice")
        ->required();
    attack_cmd->add_option("--count", attack_count, "injections to attempt")
        ->capture_default_str();

    std::string psk_csv, dsekp_csv, compare_json;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "compare server logs of a psk and a dsekp run");
    compare_cmd->add_option("--psk", psk_csv, "server_logs.csv of the psk run")->required();
    compare_cmd->add_option("--dsekp", dsekp_csv, "server_logs.csv of the dsekp run")
        ->required();
    compare_cmd->add_option("--json", compare_json, "also write the comparison as JSON here");

    try {
        app.parse(argc, argv);

        if (*run_cmd) {
            auto profile = finalize(run_cmd, run_flags);
            auto art = dsekp::runner::run_experiment(profile);
            dsekp::runner::write_artifacts(run_flags.out_dir, profile, art);
            print_run_digest(profile, art, run_flags.out_dir);
            return 0;
        }

        if (*attack_cmd) {
            auto profile = finalize(attack_cmd, attack_flags);
            auto kind = dsekp::adversary::parse_attack_kind(scenario_name);
            if (!kind) throw CLI::ValidationError("--scenario", "unknown scenario");
            if (profile.mode == dsekp::runner::Mode::Psk &&
                *kind != dsekp::adversary::AttackKind::ReplayData &&
                *kind != dsekp::adversary::AttackKind::TamperBitflip)
                throw CLI::ValidationError("--scenario",
                                           "this scenario needs the session variant");
            dsekp::adversary::AttackScenario scenario{*kind, attack_count};
            auto outcome = dsekp::runner::run_attack(profile, scenario);
            dsekp::runner::write_artifacts(attack_flags.out_dir, profile, outcome.honest);
            std::ofstream report(std::filesystem::path(attack_flags.out_dir) /
                                     "attack_report.json",
                                 std::ios::binary);
            if (!report) throw std::runtime_error("cannot write attack_report.json");
            report << outcome.report.to_json() << '\n';
            std::cout << outcome.report.to_json() << '\n';
            return 0;
        }

        // compare
        auto psk = dsekp::metrics::read_server_csv(psk_csv);
        auto dsekp_run = dsekp::metrics::read_server_csv(dsekp_csv);
        if (psk.variant != dsekp::metrics::Variant::Psk)
            throw std::runtime_error("--psk file does not carry the static-key schema");
        if (dsekp_run.variant != dsekp::metrics::Variant::Dsekp)
            throw std::runtime_error("--dsekp file does not carry the session schema");
        auto summary = dsekp::metrics::compare_runs(psk.records, dsekp_run.records);
        std::cout << dsekp::metrics::render_comparison_table(summary);
        if (!compare_json.empty()) {
            std::ofstream os(compare_json, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + compare_json);
            os << dsekp::metrics::comparison_to_json(summary) << '\n';
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help/version exit clean, bad flags do not
    } catch (const std::invalid_argument& e) {
        // Bad user input, not a broken invariant.
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
