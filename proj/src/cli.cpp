#include "pncoder/cli.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pncoder/annotation.hpp"
#include "pncoder/codebook.hpp"
#include "pncoder/config.hpp"
#include "pncoder/corpus.hpp"
#include "pncoder/errors.hpp"
#include "pncoder/metrics.hpp"
#include "pncoder/prompting.hpp"
#include "pncoder/provider.hpp"
#include "pncoder/report.hpp"
#include "pncoder/svg.hpp"

namespace fs = std::filesystem;

namespace pncoder {

namespace {

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[24];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const fs::path &path, std::string_view content) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

/// Everything the run manifest records about one invocation. The API key is
/// deliberately absent; only its presence is noted.
struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  int exit_code = 0;
  std::string error;
};

nlohmann::ordered_json config_snapshot(const AppConfig &c, const std::string &config_file) {
  nlohmann::ordered_json j;
  j["config_file"] = config_file.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(config_file);
  j["model"] = c.model;
  j["base_url"] = c.base_url;
  j["completions_path"] = c.completions_path;
  j["api_key_env"] = c.api_key_env;
  j["api_key_present"] = !c.api_key.empty();
  j["runs"] = c.runs;
  j["max_retries_per_stage"] = c.max_retries_per_stage;
  j["concurrency"] = c.concurrency;
  j["max_transport_retries"] = c.max_transport_retries;
  j["timeout_ms"] = c.timeout_ms;
  nlohmann::ordered_json sampling = nlohmann::ordered_json::object();
  for (const auto &[name, value] : c.sampling) {
    sampling[name] = value;
  }
  j["sampling"] = sampling;
  return j;
}

void write_manifest(const Manifest &m, const fs::path &path, bool timestamps) {
  nlohmann::ordered_json j;
  j["tool"] = "pncoder";
  j["command"] = m.command;
  j["created_at"] = timestamps ? nlohmann::ordered_json(iso_utc(std::chrono::system_clock::now()))
                               : nlohmann::ordered_json();
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["warnings"] = m.warnings;
  j["exit_code"] = m.exit_code;
  j["error"] = m.error.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(m.error);
  write_text_file(path, j.dump(2) + "\n");
}

fs::path manifest_path_for(const std::string &out, bool out_is_dir) {
  if (out.empty()) {
    return "pncoder_manifest.json";
  }
  if (out_is_dir) {
    return fs::path(out) / "manifest.json";
  }
  return fs::path(out + ".manifest.json");
}

fs::path audit_path_for(const fs::path &runset_path) {
  std::string s = runset_path.string();
  const std::string suffix = ".runset.json";
  if (s.size() > suffix.size() && s.ends_with(suffix)) {
    return fs::path(s.substr(0, s.size() - suffix.size()) + ".audit.jsonl");
  }
  return fs::path(s + ".audit.jsonl");
}

std::string audit_jsonl(const std::vector<AuditRecord> &records, bool timestamps) {
  std::string out;
  for (const auto &r : records) {
    nlohmann::ordered_json j;
    j["narrative"] = r.narrative_id;
    j["run"] = r.run_index;
    j["stage"] = r.stage;
    j["attempt"] = r.attempt;
    j["model"] = r.model_name;
    if (timestamps && r.timestamp) {
      j["created_at"] = iso_utc(*r.timestamp);
    } else {
      j["created_at"] = nullptr;
    }
    j["finish_reason"] = r.finish_reason;
    if (r.prompt_tokens) {
      j["prompt_tokens"] = *r.prompt_tokens;
    } else {
      j["prompt_tokens"] = nullptr;
    }
    if (r.completion_tokens) {
      j["completion_tokens"] = *r.completion_tokens;
    } else {
      j["completion_tokens"] = nullptr;
    }
    j["error"] = r.error.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(r.error);
    j["system_prompt"] = r.system_prompt;
    j["user_prompt"] = r.user_prompt;
    j["response"] = r.response_content;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Codebook resolve_codebook(const std::string &path) {
  if (path.empty()) {
    return default_codebook();
  }
  return load_codebook(path);
}

TieBreak tie_break_from(const std::string &name) {
  if (name == "zero") {
    return TieBreak::Zero;
  }
  if (name == "one") {
    return TieBreak::One;
  }
  throw ValidationError("tie-break must be \"zero\" or \"one\", got \"" + name + "\"");
}

std::vector<std::string> split_csv_list(const std::string &text) {
  std::vector<std::string> items;
  std::string current;
  for (char ch : text) {
    if (ch == ',') {
      if (!current.empty()) {
        items.push_back(current);
      }
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!current.empty()) {
    items.push_back(current);
  }
  return items;
}

} // namespace

int run_cli(int argc, char **argv) {
  CLI::App app{"pncoder: sentence-level narrative coding with chained model prompts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pncoder 0.1.0");

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (default: ./pncoder.json if present)");
  bool no_timestamps = false;
  app.add_flag("--no-timestamps", no_timestamps,
               "omit timestamps from all outputs for byte-identical reruns");

  // segment
  auto *seg = app.add_subcommand("segment", "split a raw transcript into numbered sentences");
  seg->fallthrough();
  std::string seg_input;
  seg->add_option("input", seg_input, "raw transcript (.txt)")->required()->check(CLI::ExistingFile);
  std::string seg_out;
  seg->add_option("-o,--output", seg_out, "segmented document (.jsonl)")->required();

  // annotate
  auto *ann = app.add_subcommand("annotate", "run the three-stage annotation chain over documents");
  ann->fallthrough();
  std::vector<std::string> ann_docs;
  ann->add_option("documents", ann_docs, "narrative documents (.txt or .jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  std::string ann_codebook;
  ann->add_option("--codebook", ann_codebook, "codebook JSON (default: built-in scheme)");
  std::string ann_model;
  auto *ann_model_opt = ann->add_option("--model", ann_model, "model name sent to the provider");
  int ann_runs = 0;
  auto *ann_runs_opt = ann->add_option("--runs", ann_runs, "independent runs per document")
                            ->check(CLI::PositiveNumber);
  int ann_retries = 0;
  auto *ann_retries_opt =
      ann->add_option("--max-retries", ann_retries, "parse retries per stage")
          ->check(CLI::NonNegativeNumber);
  int ann_concurrency = 0;
  auto *ann_conc_opt = ann->add_option("--concurrency", ann_concurrency, "runs in flight at once")
                            ->check(CLI::PositiveNumber);
  long long ann_timeout = 0;
  auto *ann_timeout_opt =
      ann->add_option("--timeout-ms", ann_timeout, "per-request timeout")->check(CLI::PositiveNumber);
  bool ann_mock = false;
  ann->add_flag("--mock", ann_mock, "use the deterministic offline provider");
  std::string ann_out;
  ann->add_option("-o,--output", ann_out,
                  "run set file for one document, or directory for several")
      ->required();

  // vote
  auto *vot = app.add_subcommand("vote", "collapse a run set into one matrix by majority vote");
  vot->fallthrough();
  std::string vot_input;
  vot->add_option("runset", vot_input, "run set JSON")->required()->check(CLI::ExistingFile);
  std::string vot_codebook;
  vot->add_option("--codebook", vot_codebook, "codebook JSON (default: built-in scheme)");
  std::string vot_tie = "zero";
  vot->add_option("--tie-break", vot_tie, "tie resolution for even splits")
      ->check(CLI::IsMember({"zero", "one"}));
  std::string vot_out;
  vot->add_option("-o,--output", vot_out, "annotation matrix CSV")->required();

  // evaluate
  auto *eva = app.add_subcommand("evaluate", "score a predicted matrix against human annotators");
  eva->fallthrough();
  std::string eva_pred;
  eva->add_option("prediction", eva_pred, "predicted matrix CSV")->required()->check(CLI::ExistingFile);
  std::vector<std::string> eva_annotators;
  eva->add_option("--annotators", eva_annotators, "human annotation CSVs")
      ->required()
      ->check(CLI::ExistingFile);
  std::string eva_policy;
  eva->add_option("--gold-policy", eva_policy, "gold construction rule")
      ->required()
      ->check(CLI::IsMember({"min-match", "majority"}));
  std::string eva_tie = "zero";
  eva->add_option("--tie-break", eva_tie, "majority-gold tie resolution")
      ->check(CLI::IsMember({"zero", "one"}));
  std::string eva_codebook;
  eva->add_option("--codebook", eva_codebook, "codebook JSON (default: built-in scheme)");
  std::string eva_out;
  eva->add_option("-o,--output", eva_out, "evaluation bundle JSON")->required();

  // analyze
  auto *ana = app.add_subcommand("analyze", "co-occurrence and frequency analytics over matrices");
  ana->fallthrough();
  std::vector<std::string> ana_inputs;
  ana->add_option("matrices", ana_inputs, "annotation matrix CSVs")
      ->required()
      ->check(CLI::ExistingFile);
  bool ana_pearson = false;
  ana->add_flag("--pearson", ana_pearson, "emit the correlation matrix");
  bool ana_jaccard = false;
  ana->add_flag("--jaccard", ana_jaccard, "emit the overlap matrix");
  bool ana_freq = false;
  ana->add_flag("--frequencies", ana_freq, "emit per-code frequencies");
  std::string ana_codebook;
  ana->add_option("--codebook", ana_codebook, "codebook JSON (default: built-in scheme)");
  std::string ana_out;
  ana->add_option("-o,--output", ana_out, "output directory")->required();

  // report
  auto *rep = app.add_subcommand("report", "merge result bundles into CSV/JSON/SVG artifacts");
  rep->fallthrough();
  std::vector<std::string> rep_bundles;
  rep->add_option("bundles", rep_bundles, "bundle JSON files from evaluate/analyze")
      ->required()
      ->check(CLI::ExistingFile);
  std::string rep_out;
  rep->add_option("-o,--output", rep_out, "output directory")->required();
  bool rep_svg = false;
  rep->add_flag("--svg", rep_svg, "also render heatmap figures");
  std::string rep_strip;
  rep->add_option("--strip", rep_strip, "matrix CSV to render as a segment strip figure")
      ->check(CLI::ExistingFile);
  std::vector<std::string> rep_strip_pair;
  rep->add_option("--strip-pair", rep_strip_pair,
                  "two matrix CSVs to render as a side-by-side strip figure")
      ->expected(2)
      ->check(CLI::ExistingFile);
  std::string rep_strip_codes;
  rep->add_option("--strip-codes", rep_strip_codes,
                  "comma-separated code ids for strip figures (default: all)");
  std::string rep_codebook;
  rep->add_option("--codebook", rep_codebook, "codebook JSON (default: built-in scheme)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    if (rc == 0) {
      return 0;
    }
    Manifest manifest;
    manifest.command = app.get_subcommands().empty() ? "usage" : app.get_subcommands().front()->get_name();
    manifest.exit_code = 1;
    manifest.error = std::string("usage error: ") + e.what();
    try {
      write_manifest(manifest, manifest_path_for("", false), !no_timestamps);
    } catch (...) {
    }
    return 1;
  }

  const bool timestamps = !no_timestamps;
  Manifest manifest;
  // Resolve the manifest location from the requested output up front, so even
  // failures before the command body (config errors) leave it next to the
  // output instead of in the working directory.
  fs::path manifest_path = manifest_path_for("", false);
  if (seg->parsed()) {
    manifest_path = manifest_path_for(seg_out, false);
  } else if (ann->parsed()) {
    const bool out_is_dir =
        ann_docs.size() > 1 || ann_out.back() == '/' || fs::is_directory(ann_out);
    manifest_path = manifest_path_for(ann_out, out_is_dir);
  } else if (vot->parsed()) {
    manifest_path = manifest_path_for(vot_out, false);
  } else if (eva->parsed()) {
    manifest_path = manifest_path_for(eva_out, false);
  } else if (ana->parsed()) {
    manifest_path = manifest_path_for(ana_out, true);
  } else if (rep->parsed()) {
    manifest_path = manifest_path_for(rep_out, true);
  }
  int code = 0;

  try {
    AppConfig cfg = load_app_config(config_path);
    manifest.config = config_snapshot(cfg, config_path);

    if (seg->parsed()) {
      manifest.command = "segment";
      manifest.inputs = {seg_input};
      NarrativeDocument doc = load_narrative(seg_input, NarrativeFormat::RawText);
      save_narrative(doc, seg_out);
      manifest.outputs.push_back(seg_out);
    } else if (ann->parsed()) {
      manifest.command = "annotate";
      manifest.inputs = ann_docs;
      if (ann_model_opt->count()) cfg.model = ann_model;
      if (ann_runs_opt->count()) cfg.runs = ann_runs;
      if (ann_retries_opt->count()) cfg.max_retries_per_stage = ann_retries;
      if (ann_conc_opt->count()) cfg.concurrency = ann_concurrency;
      if (ann_timeout_opt->count()) cfg.timeout_ms = ann_timeout;
      manifest.config = config_snapshot(cfg, config_path);

      const bool out_is_dir =
          ann_docs.size() > 1 || ann_out.back() == '/' || fs::is_directory(ann_out);
      if (out_is_dir) {
        fs::create_directories(ann_out);
      }

      Codebook cb = resolve_codebook(ann_codebook);
      std::unique_ptr<ChatProvider> provider;
      if (ann_mock) {
        if (cfg.model.empty()) {
          cfg.model = "mock";
          manifest.config = config_snapshot(cfg, config_path);
        }
        provider = std::make_unique<MockChatProvider>();
      } else {
        if (cfg.model.empty()) {
          throw ConfigError("no model configured; pass --model, set PNCODER_MODEL, "
                            "or set model in the config file");
        }
        provider = std::make_unique<HttpChatProvider>(cfg.provider_config());
      }
      ChainConfig chain = cfg.chain_config();

      bool partial = false;
      for (const std::string &doc_path : ann_docs) {
        NarrativeDocument doc = load_narrative(doc_path);
        RunManyResult result = run_many(*provider, doc, cb, chain);
        fs::path runset_path =
            out_is_dir ? fs::path(ann_out) / (doc.id() + ".runset.json") : fs::path(ann_out);
        save_runset(result.runs, cb, runset_path);
        manifest.outputs.push_back(runset_path.string());
        fs::path audit_path = audit_path_for(runset_path);
        write_text_file(audit_path, audit_jsonl(result.audit, timestamps));
        manifest.outputs.push_back(audit_path.string());
        for (const RunFailure &f : result.failures) {
          manifest.warnings.push_back("narrative " + doc.id() + " run " +
                                      std::to_string(f.run_index) + " failed: " + f.message);
        }
        partial = partial || result.partial();
      }
      if (partial) {
        code = 3;
      }
    } else if (vot->parsed()) {
      manifest.command = "vote";
      manifest.inputs = {vot_input};
      Codebook cb = resolve_codebook(vot_codebook);
      RunSet rs = load_runset(vot_input, cb);
      AnnotationMatrix voted = majority_vote(rs, tie_break_from(vot_tie));
      save_matrix_csv(voted, cb, vot_out);
      manifest.outputs.push_back(vot_out);
    } else if (eva->parsed()) {
      manifest.command = "evaluate";
      manifest.inputs = {eva_pred};
      manifest.inputs.insert(manifest.inputs.end(), eva_annotators.begin(), eva_annotators.end());
      Codebook cb = resolve_codebook(eva_codebook);
      AnnotationMatrix pred = load_matrix_csv(eva_pred, cb);
      std::vector<AnnotationMatrix> annotators;
      annotators.reserve(eva_annotators.size());
      for (const std::string &path : eva_annotators) {
        // Human CSVs usually lack a narrative comment; align them with the
        // prediction instead of tripping over file-stem ids.
        annotators.push_back(parse_matrix_csv(read_file(path), cb,
                                              AnnotatorId::human(fs::path(path).stem().string()),
                                              pred.narrative_id()));
      }
      GoldPolicy policy = gold_policy_from_name(eva_policy);
      AnnotationMatrix gold =
          policy == GoldPolicy::MinimumMatch
              ? minimum_match_gold(pred, annotators)
              : majority_gold(annotators, tie_break_from(eva_tie), &manifest.warnings);
      EvaluationReport scores = f1_scores(pred, gold, cb);
      scores.gold_policy = policy;
      scores.annotator_labels.clear();
      scores.annotator_labels.push_back(pred.annotator().label);
      for (const AnnotationMatrix &m : annotators) {
        scores.annotator_labels.push_back(m.annotator().label);
      }
      scores.narrative_ids = {pred.narrative_id()};

      ReportBundle bundle;
      for (const Code &c : cb.codes()) {
        bundle.code_ids.push_back(c.id);
      }
      bundle.provenance.codebook_version = cb.version();
      bundle.provenance.model_name = pred.annotator().model_name;
      bundle.provenance.prompt_variant = pred.annotator().prompt_variant;
      if (timestamps) {
        bundle.provenance.created_at = iso_utc(std::chrono::system_clock::now());
      }
      bundle.evaluation = std::move(scores);
      save_bundle(bundle, eva_out);
      manifest.outputs.push_back(eva_out);
    } else if (ana->parsed()) {
      manifest.command = "analyze";
      manifest.inputs = ana_inputs;
      Codebook cb = resolve_codebook(ana_codebook);
      std::vector<AnnotationMatrix> matrices;
      matrices.reserve(ana_inputs.size());
      for (const std::string &path : ana_inputs) {
        matrices.push_back(load_matrix_csv(path, cb));
      }
      bool all = !ana_pearson && !ana_jaccard && !ana_freq;

      ReportBundle bundle;
      for (const Code &c : cb.codes()) {
        bundle.code_ids.push_back(c.id);
      }
      bundle.provenance.codebook_version = cb.version();
      bundle.provenance.model_name = matrices.front().annotator().model_name;
      bundle.provenance.prompt_variant = matrices.front().annotator().prompt_variant;
      if (timestamps) {
        bundle.provenance.created_at = iso_utc(std::chrono::system_clock::now());
      }
      if (all || ana_freq) {
        FrequencyTable table;
        table.percent = mean_code_frequencies(matrices);
        table.narratives = static_cast<int>(matrices.size());
        bundle.frequencies = std::move(table);
      }
      if (all || ana_pearson) {
        bundle.pearson = pearson_matrix(matrices);
      }
      if (all || ana_jaccard) {
        bundle.jaccard = jaccard_matrix(matrices);
      }

      fs::create_directories(ana_out);
      fs::path bundle_path = fs::path(ana_out) / "analysis.json";
      save_bundle(bundle, bundle_path);
      manifest.outputs.push_back(bundle_path.string());
      if (bundle.frequencies) {
        fs::path p = fs::path(ana_out) / "frequencies.csv";
        write_text_file(p, frequencies_csv(bundle));
        manifest.outputs.push_back(p.string());
      }
      if (bundle.pearson) {
        fs::path p = fs::path(ana_out) / "pearson.csv";
        write_text_file(p, cooccurrence_csv(*bundle.pearson, bundle.code_ids));
        manifest.outputs.push_back(p.string());
      }
      if (bundle.jaccard) {
        fs::path p = fs::path(ana_out) / "jaccard.csv";
        write_text_file(p, cooccurrence_csv(*bundle.jaccard, bundle.code_ids));
        manifest.outputs.push_back(p.string());
      }
    } else if (rep->parsed()) {
      manifest.command = "report";
      manifest.inputs = rep_bundles;
      manifest.inputs.insert(manifest.inputs.end(), rep_strip_pair.begin(), rep_strip_pair.end());
      if (!rep_strip.empty()) {
        manifest.inputs.push_back(rep_strip);
      }
      Codebook cb = resolve_codebook(rep_codebook);
      std::vector<ReportBundle> bundles;
      bundles.reserve(rep_bundles.size());
      for (const std::string &path : rep_bundles) {
        bundles.push_back(load_bundle(path));
      }
      ReportBundle merged = merge_bundles(bundles);
      if (!timestamps) {
        merged.provenance.created_at.clear();
      }
      for (const fs::path &p : write_report(merged, rep_out)) {
        manifest.outputs.push_back(p.string());
      }
      if (rep_svg) {
        std::vector<std::string> labels;
        for (const std::string &id : merged.code_ids) {
          if (auto idx = cb.index_of(id)) {
            labels.push_back(cb.at(*idx).display_name);
          } else {
            labels.push_back(id);
          }
        }
        if (merged.pearson) {
          fs::path p = fs::path(rep_out) / "pearson_heatmap.svg";
          render_heatmap_svg(*merged.pearson, labels, "Code co-occurrence (Pearson)",
                             HeatmapScale::Diverging, p);
          manifest.outputs.push_back(p.string());
        }
        if (merged.jaccard) {
          fs::path p = fs::path(rep_out) / "jaccard_heatmap.svg";
          render_heatmap_svg(*merged.jaccard, labels, "Code co-occurrence (Jaccard)",
                             HeatmapScale::Sequential, p);
          manifest.outputs.push_back(p.string());
        }
        if (!merged.pearson && !merged.jaccard) {
          manifest.warnings.push_back("--svg given but no co-occurrence section is present; "
                                      "no heatmaps emitted");
        }
      }
      std::vector<std::string> strip_codes = split_csv_list(rep_strip_codes);
      if (strip_codes.empty()) {
        strip_codes = merged.code_ids;
      }
      if (!rep_strip.empty()) {
        AnnotationMatrix m = load_matrix_csv(rep_strip, cb);
        fs::path p = fs::path(rep_out) / "segments.svg";
        render_segment_strip_svg(m, strip_codes, cb, "Code segments: " + m.narrative_id(), p);
        manifest.outputs.push_back(p.string());
      }
      if (!rep_strip_pair.empty()) {
        AnnotationMatrix a = load_matrix_csv(rep_strip_pair[0], cb);
        AnnotationMatrix b = load_matrix_csv(rep_strip_pair[1], cb);
        fs::path p = fs::path(rep_out) / "segments_pair.svg";
        render_segment_strip_pair_svg(a, b, strip_codes, cb,
                                      "Code segments: " + a.narrative_id(), p);
        manifest.outputs.push_back(p.string());
      }
    }
  } catch (const ProviderError &e) {
    code = 2;
    manifest.error = e.what();
  } catch (const StageFailedError &e) {
    code = 2;
    manifest.error = e.what();
  } catch (const AllRunsFailedError &e) {
    code = 2;
    manifest.error = e.what();
  } catch (const std::exception &e) {
    code = 1;
    manifest.error = e.what();
  }

  if (!manifest.error.empty()) {
    std::cerr << "pncoder: error: " << manifest.error << "\n";
  }
  manifest.exit_code = code;
  try {
    write_manifest(manifest, manifest_path, timestamps);
  } catch (const std::exception &e) {
    std::cerr << "pncoder: error: could not write run manifest: " << e.what() << "\n";
    if (code == 0) {
      code = 1;
    }
  }
  return code;
}

} // namespace pncoder
