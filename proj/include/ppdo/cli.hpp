// Copyright 2026 The ppdo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// `ppdo run` front end: flag and config-file parsing, orchestration, and
// record output. Kept header-only so tests can drive it without a process.

#ifndef PPDO_CLI_HPP
#define PPDO_CLI_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppdo/audit.hpp"
#include "ppdo/error.hpp"
#include "ppdo/experiments.hpp"
#include "ppdo/problem_io.hpp"
#include "ppdo/protocol.hpp"
#include "ppdo/transcript.hpp"

namespace ppdo::cli {

inline constexpr const char* kOutputDirEnv = "PPDO_OUTPUT_DIR";
inline constexpr const char* kRecordSchema = "ppdo.iteration/1";

enum class OutputFormat { kCsv, kJsonl };
enum class SchemeChoice { kSingleMod, kPaillier, kNone };

struct RunConfig {
  std::string experiment;  // "numerical", "numerical-as-printed", "traffic" or a file path
  Method method = Method::kSpds;
  SchemeChoice scheme = SchemeChoice::kSingleMod;
  std::optional<unsigned> sigma;
  std::optional<unsigned> key_bits;
  std::optional<unsigned> m_bits;
  std::uint64_t seed = 0;
  std::optional<std::string> output;
  OutputFormat format = OutputFormat::kCsv;
  bool compare_plaintext = false;
  std::optional<std::string> transcript;
  std::optional<int> k_max;
  std::optional<double> eps0;
  double b_max = 1e4;
  std::optional<std::string> key_w;
  std::optional<std::string> key_n;
  std::optional<std::string> key_g;
  std::optional<std::string> key_lambda;
};

/// Thrown for --help; carries the rendered usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline Method method_from(const std::string& s) {
  if (s == "spds") return Method::kSpds;
  if (s == "rpds") return Method::kRpds;
  throw ConfigError("cli", "unknown method '" + s + "' (spds | rpds)");
}

inline SchemeChoice scheme_from(const std::string& s) {
  if (s == "singlemod") return SchemeChoice::kSingleMod;
  if (s == "paillier") return SchemeChoice::kPaillier;
  if (s == "none") return SchemeChoice::kNone;
  throw ConfigError("cli", "unknown scheme '" + s + "' (singlemod | paillier | none)");
}

inline OutputFormat format_from(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "jsonl") return OutputFormat::kJsonl;
  throw ConfigError("cli", "unknown format '" + s + "' (csv | jsonl)");
}

inline std::string_view scheme_name(SchemeChoice s) {
  switch (s) {
    case SchemeChoice::kSingleMod: return "singlemod";
    case SchemeChoice::kPaillier: return "paillier";
    default: return "none";
  }
}

inline void apply_file(RunConfig& c, const json& f) {
  static const char* const kKeys[] = {"experiment", "method",    "scheme",     "sigma",
                                      "key_bits",   "m_bits",    "seed",       "output",
                                      "format",     "compare_plaintext", "transcript", "k_max",
                                      "eps0",       "b_max",     "key"};
  if (!f.is_object()) throw ConfigError("cli", "config file must hold a JSON object");
  for (auto it = f.begin(); it != f.end(); ++it) {
    bool known = false;
    for (const char* k : kKeys) known = known || it.key() == k;
    if (!known) throw ConfigError("cli", "unknown config key '" + it.key() + "'");
  }
  try {
    if (f.contains("experiment")) c.experiment = f["experiment"].get<std::string>();
    if (f.contains("method")) c.method = method_from(f["method"].get<std::string>());
    if (f.contains("scheme")) c.scheme = scheme_from(f["scheme"].get<std::string>());
    if (f.contains("sigma")) c.sigma = f["sigma"].get<unsigned>();
    if (f.contains("key_bits")) c.key_bits = f["key_bits"].get<unsigned>();
    if (f.contains("m_bits")) c.m_bits = f["m_bits"].get<unsigned>();
    if (f.contains("seed")) c.seed = f["seed"].get<std::uint64_t>();
    if (f.contains("output")) c.output = f["output"].get<std::string>();
    if (f.contains("format")) c.format = format_from(f["format"].get<std::string>());
    if (f.contains("compare_plaintext")) c.compare_plaintext = f["compare_plaintext"].get<bool>();
    if (f.contains("transcript")) c.transcript = f["transcript"].get<std::string>();
    if (f.contains("k_max")) c.k_max = f["k_max"].get<int>();
    if (f.contains("eps0")) c.eps0 = f["eps0"].get<double>();
    if (f.contains("b_max")) c.b_max = f["b_max"].get<double>();
    if (f.contains("key")) {
      const auto& k = f["key"];
      if (!k.is_object()) throw ConfigError("cli", "config key 'key' must be an object");
      for (auto it = k.begin(); it != k.end(); ++it) {
        const std::string& name = it.key();
        const std::string val = it.value().get<std::string>();
        if (name == "w") c.key_w = val;
        else if (name == "n") c.key_n = val;
        else if (name == "g") c.key_g = val;
        else if (name == "lambda") c.key_lambda = val;
        else throw ConfigError("cli", "unknown config key 'key." + name + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("cli", std::string("config file: ") + e.what());
  }
}

inline void validate(const RunConfig& c) {
  if (c.experiment.empty()) throw ConfigError("cli", "no experiment given (--experiment)");
  if (c.scheme == SchemeChoice::kNone) {
    if (c.sigma || c.key_bits || c.m_bits || c.key_w || c.key_n || c.key_lambda) {
      throw ConfigError("cli", "scheme 'none' runs without encryption; sigma/key options conflict");
    }
    if (c.compare_plaintext) {
      throw ConfigError("cli", "--compare-plaintext needs an encryption scheme");
    }
    if (c.transcript) throw ConfigError("cli", "--transcript needs an encryption scheme");
  }
  if (c.scheme == SchemeChoice::kSingleMod && (c.key_n || c.key_lambda || c.key_g)) {
    throw ConfigError("cli", "Paillier key material given for scheme 'singlemod'");
  }
  if (c.scheme == SchemeChoice::kPaillier && c.key_w) {
    throw ConfigError("cli", "SingleMod key given for scheme 'paillier'");
  }
  if (c.k_max && *c.k_max < 1) throw ConfigError("cli", "k_max must be at least 1");
  if (c.eps0 && !(*c.eps0 > 0.0)) throw ConfigError("cli", "eps0 must be positive");
}

}  // namespace detail

/// Parses `run ...` arguments (program name excluded). Values from
/// `--config FILE` are applied first; explicit flags override them.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Privacy-preserving decentralized optimization", "ppdo"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run one experiment");

  std::string config_file, experiment, method, scheme, output, format, transcript;
  unsigned sigma = 0, key_bits = 0, m_bits = 0;
  std::uint64_t seed = 0;
  int k_max = 0;
  double eps0 = 0.0, b_max = 0.0;
  bool compare = false;

  run->add_option("--config", config_file, "JSON run configuration");
  auto* o_exp = run->add_option("--experiment", experiment,
                                "numerical | numerical-as-printed | traffic | problem file");
  auto* o_method = run->add_option("--method", method, "spds | rpds");
  auto* o_scheme = run->add_option("--scheme", scheme, "singlemod | paillier | none");
  auto* o_sigma = run->add_option("--sigma", sigma, "Preserved decimal digits");
  auto* o_bits = run->add_option("--key-bits", key_bits, "Key size in bits");
  auto* o_mbits = run->add_option("--m-bits", m_bits, "SingleMod multiplier bits");
  auto* o_seed = run->add_option("--seed", seed, "Master seed");
  auto* o_out = run->add_option("--output", output, "Record file (default: stdout)");
  auto* o_fmt = run->add_option("--format", format, "csv | jsonl");
  auto* o_cmp = run->add_flag("--compare-plaintext", compare, "Run the plaintext twin, fill P_e");
  auto* o_tr = run->add_option("--transcript", transcript, "Write the wire transcript (JSON lines)");
  auto* o_kmax = run->add_option("--k-max", k_max, "Iteration cap");
  auto* o_eps0 = run->add_option("--eps0", eps0, "Stopping tolerance");
  auto* o_bmax = run->add_option("--b-max", b_max, "Per-message magnitude bound");

  std::vector<std::string> argv_store{"ppdo"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(run->parsed() ? run->help("ppdo") : app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError("cli", e.what());
  }

  RunConfig c;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw ConfigError("cli", "cannot open config file '" + config_file + "'");
    nlohmann::json f;
    try {
      f = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cli", "malformed config file '" + config_file + "': " + e.what());
    }
    detail::apply_file(c, f);
  }
  if (o_exp->count()) c.experiment = experiment;
  if (o_method->count()) c.method = detail::method_from(method);
  if (o_scheme->count()) c.scheme = detail::scheme_from(scheme);
  if (o_sigma->count()) c.sigma = sigma;
  if (o_bits->count()) c.key_bits = key_bits;
  if (o_mbits->count()) c.m_bits = m_bits;
  if (o_seed->count()) c.seed = seed;
  if (o_out->count()) c.output = output;
  if (o_fmt->count()) c.format = detail::format_from(format);
  if (o_cmp->count()) c.compare_plaintext = compare;
  if (o_tr->count()) c.transcript = transcript;
  if (o_kmax->count()) c.k_max = k_max;
  if (o_eps0->count()) c.eps0 = eps0;
  if (o_bmax->count()) c.b_max = b_max;
  detail::validate(c);
  return c;
}

inline Experiment resolve_experiment(const std::string& name) {
  if (name == "numerical") return build_numerical_example();
  if (name == "numerical-as-printed") return build_numerical_example(NumericalVariant::kAsPrinted);
  if (name == "traffic") return build_traffic_example();
  return load_experiment_file(name);
}

namespace detail {

inline std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline double round12(double v) { return std::strtod(fmt12(v).c_str(), nullptr); }

inline void write_csv(std::ostream& out, const std::vector<IterationRecord>& records,
                      Eigen::Index x_dim, Eigen::Index lambda_dim) {
  out << "k";
  for (Eigen::Index j = 1; j <= x_dim; ++j) out << ",x_" << j;
  for (Eigen::Index j = 1; j <= lambda_dim; ++j) out << ",lambda_" << j;
  out << ",P_e,G_e,eps\n";
  for (const auto& r : records) {
    out << r.k;
    for (Eigen::Index j = 0; j < r.x.size(); ++j) out << ',' << fmt12(r.x[j]);
    for (Eigen::Index j = 0; j < r.lambda.size(); ++j) out << ',' << fmt12(r.lambda[j]);
    out << ',' << (r.pe ? fmt12(*r.pe) : "") << ',' << (r.ge ? fmt12(*r.ge) : "") << ','
        << fmt12(r.eps) << '\n';
  }
}

inline void write_jsonl(std::ostream& out, const std::vector<IterationRecord>& records) {
  auto vec = [](const Vector& v) {
    json a = json::array();
    for (Eigen::Index j = 0; j < v.size(); ++j) a.push_back(round12(v[j]));
    return a;
  };
  auto opt = [](const std::optional<double>& v) { return v ? json(round12(*v)) : json(nullptr); };
  for (const auto& r : records) {
    json rec = {{"schema", kRecordSchema}, {"k", r.k},          {"x", vec(r.x)},
                {"lambda", vec(r.lambda)}, {"P_e", opt(r.pe)}, {"G_e", opt(r.ge)},
                {"eps", round12(r.eps)}};
    out << rec.dump() << '\n';
  }
}

inline std::optional<std::filesystem::path> output_path(const RunConfig& c) {
  if (c.output) return std::filesystem::path(*c.output);
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    std::string stem = std::filesystem::path(c.experiment).stem().string();
    return std::filesystem::path(dir) /
           (stem + "-" + std::string(scheme_name(c.scheme)) + "-" + std::to_string(c.seed) +
            (c.format == OutputFormat::kCsv ? ".csv" : ".jsonl"));
  }
  return std::nullopt;
}

}  // namespace detail

/// Runs the configured pipeline. Exit code: 0 converged, 2 iteration cap
/// reached, 1 error. Records go to the output file (or `out`), the summary
/// line and diagnostics to `err`.
inline int run(const RunConfig& config, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  try {
    Experiment exp = resolve_experiment(config.experiment);
    if (config.k_max) exp.params.k_max = *config.k_max;
    if (config.eps0) exp.params.eps0 = *config.eps0;

    HarnessOptions opts;
    opts.method = config.method;
    opts.b_max = config.b_max;
    opts.master_seed = config.seed;
    opts.compare_plaintext = config.compare_plaintext;
    opts.record_transcripts = config.transcript.has_value();
    if (config.scheme != SchemeChoice::kNone) {
      CryptoSettings cs;
      cs.scheme = config.scheme == SchemeChoice::kSingleMod ? Scheme::kSingleMod : Scheme::kPaillier;
      cs.sigma = config.sigma.value_or(exp.sigma);
      cs.key_bits = config.key_bits.value_or(cs.scheme == Scheme::kSingleMod ? 51U : 512U);
      cs.m_bits = config.m_bits.value_or(kDefaultMultiplierBits);
      cs.singlemod_w = config.key_w;
      cs.paillier_n = config.key_n;
      cs.paillier_g = config.key_g;
      cs.paillier_lambda = config.key_lambda;
      opts.crypto = cs;
    }

    const HarnessResult result = run_experiment(exp, opts);

    const auto path = detail::output_path(config);
    std::ofstream file;
    if (path) {
      if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
      file.open(*path, std::ios::binary);
      if (!file) throw ConfigError("cli", "cannot write '" + path->string() + "'");
    }
    std::ostream& sink = path ? static_cast<std::ostream&>(file) : out;
    const auto& first = result.trajectory.states.front();
    if (config.format == OutputFormat::kCsv) {
      detail::write_csv(sink, result.records, flatten(first.x).size(), first.lambda.size());
    } else {
      detail::write_jsonl(sink, result.records);
    }

    if (config.transcript && result.run) {
      std::ofstream tr(*config.transcript, std::ios::binary);
      if (!tr) throw ConfigError("cli", "cannot write '" + *config.transcript + "'");
      write_transcript(tr, result.run->wire);
    }

    nlohmann::json summary = {{"iterations", result.iterations()},
                              {"converged", result.converged()}};
    const auto gap = result.final_gap();
    const auto pe = result.max_pe();
    summary["final_G_e"] = gap ? nlohmann::json(detail::round12(*gap)) : nlohmann::json(nullptr);
    summary["max_P_e"] = pe ? nlohmann::json(detail::round12(*pe)) : nlohmann::json(nullptr);
    err << summary.dump() << '\n';
    return result.converged() ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ppdo::cli

#endif  // PPDO_CLI_HPP
