#include "pncoder/report.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "pncoder/errors.hpp"
#include "pncoder/text.hpp"

namespace pncoder {

using nlohmann::json;
using nlohmann::ordered_json;
using text::format_fixed;

namespace {

constexpr int kDecimals = 4;

std::string cell(const std::optional<double> &v) {
  return v ? format_fixed(*v, kDecimals) : std::string();
}

ordered_json jnum(const std::optional<double> &v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json jstr(const std::string &s) {
  return s.empty() ? ordered_json(nullptr) : ordered_json(s);
}

std::optional<double> mean_defined(const std::vector<std::optional<double>> &values) {
  double sum = 0.0;
  int n = 0;
  for (const std::optional<double> &v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) {
    return std::nullopt;
  }
  return sum / n;
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("failed reading " + path.string());
  }
  return content;
}

} // namespace

void ReportBundle::validate() const {
  if (code_ids.empty()) {
    throw ValidationError("report bundle has no code ids");
  }
  std::set<std::string> seen(code_ids.begin(), code_ids.end());
  if (seen.size() != code_ids.size()) {
    throw ValidationError("report bundle has duplicate code ids");
  }
  if (provenance.codebook_version.empty()) {
    throw ValidationError("report bundle provenance lacks a codebook version");
  }
  if (evaluation) {
    if (evaluation->per_code.size() != code_ids.size()) {
      throw ValidationError("evaluation covers " + std::to_string(evaluation->per_code.size()) +
                            " codes, bundle has " + std::to_string(code_ids.size()));
    }
    for (std::size_t i = 0; i < code_ids.size(); ++i) {
      if (evaluation->per_code[i].code_id != code_ids[i]) {
        throw ValidationError("evaluation code order differs from bundle code ids at position " +
                              std::to_string(i));
      }
    }
  }
  if (frequencies && frequencies->percent.size() != code_ids.size()) {
    throw ValidationError("frequency table covers " +
                          std::to_string(frequencies->percent.size()) + " codes, bundle has " +
                          std::to_string(code_ids.size()));
  }
  for (const auto *m : {&pearson, &jaccard}) {
    if (!*m) {
      continue;
    }
    if ((*m)->size() != code_ids.size()) {
      throw ValidationError("co-occurrence matrix size differs from bundle code ids");
    }
    for (const auto &row : **m) {
      if (row.size() != code_ids.size()) {
        throw ValidationError("co-occurrence matrix is not square");
      }
    }
  }
}

ReportBundle merge_bundles(const std::vector<ReportBundle> &bundles) {
  if (bundles.empty()) {
    throw ValidationError("nothing to merge: no bundles given");
  }
  ReportBundle out = bundles.front();
  out.validate();
  for (std::size_t i = 1; i < bundles.size(); ++i) {
    const ReportBundle &b = bundles[i];
    b.validate();
    if (b.code_ids != out.code_ids) {
      throw ValidationError("bundles disagree on code ids");
    }
    if (b.provenance.codebook_version != out.provenance.codebook_version) {
      throw ValidationError("bundles disagree on codebook version (\"" +
                            out.provenance.codebook_version + "\" vs \"" +
                            b.provenance.codebook_version + "\")");
    }
    auto take = [](std::string &dst, const std::string &src) {
      if (dst.empty()) {
        dst = src;
      }
    };
    take(out.provenance.model_name, b.provenance.model_name);
    take(out.provenance.prompt_variant, b.provenance.prompt_variant);
    take(out.provenance.created_at, b.provenance.created_at);
    if (!out.provenance.runs) {
      out.provenance.runs = b.provenance.runs;
    }
    if (b.evaluation) {
      if (out.evaluation) {
        throw ValidationError("two bundles both carry an evaluation section");
      }
      out.evaluation = b.evaluation;
    }
    if (b.frequencies) {
      if (out.frequencies) {
        throw ValidationError("two bundles both carry a frequency section");
      }
      out.frequencies = b.frequencies;
    }
    if (b.pearson) {
      if (out.pearson) {
        throw ValidationError("two bundles both carry a pearson section");
      }
      out.pearson = b.pearson;
    }
    if (b.jaccard) {
      if (out.jaccard) {
        throw ValidationError("two bundles both carry a jaccard section");
      }
      out.jaccard = b.jaccard;
    }
  }
  return out;
}

std::string_view gold_policy_name(GoldPolicy policy) {
  return policy == GoldPolicy::MinimumMatch ? "min-match" : "majority";
}

GoldPolicy gold_policy_from_name(std::string_view name) {
  if (name == "min-match") {
    return GoldPolicy::MinimumMatch;
  }
  if (name == "majority") {
    return GoldPolicy::Majority;
  }
  throw ValidationError("unknown gold policy \"" + std::string(name) +
                        "\" (expected min-match or majority)");
}

namespace {

ordered_json cooccurrence_to_json(const CooccurrenceMatrix &m) {
  ordered_json values = ordered_json::array();
  ordered_json counts = ordered_json::array();
  for (const auto &row : m) {
    ordered_json vrow = ordered_json::array();
    ordered_json crow = ordered_json::array();
    for (const CooccurrenceCell &c : row) {
      vrow.push_back(jnum(c.value));
      crow.push_back(c.narratives);
    }
    values.push_back(std::move(vrow));
    counts.push_back(std::move(crow));
  }
  ordered_json out;
  out["values"] = std::move(values);
  out["narratives"] = std::move(counts);
  return out;
}

CooccurrenceMatrix cooccurrence_from_json(const json &j) {
  if (!j.is_object() || !j.contains("values") || !j.contains("narratives")) {
    throw ParseError("co-occurrence section needs values and narratives grids");
  }
  const json &values = j["values"];
  const json &counts = j["narratives"];
  if (!values.is_array() || !counts.is_array() || values.size() != counts.size()) {
    throw ParseError("co-occurrence grids are malformed");
  }
  CooccurrenceMatrix m;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const json &vrow = values[i];
    const json &crow = counts[i];
    if (!vrow.is_array() || !crow.is_array() || vrow.size() != crow.size()) {
      throw ParseError("co-occurrence grid row " + std::to_string(i) + " is malformed");
    }
    std::vector<CooccurrenceCell> row;
    for (std::size_t k = 0; k < vrow.size(); ++k) {
      CooccurrenceCell c;
      if (vrow[k].is_number()) {
        c.value = vrow[k].get<double>();
      } else if (!vrow[k].is_null()) {
        throw ParseError("co-occurrence value must be a number or null");
      }
      if (!crow[k].is_number_integer()) {
        throw ParseError("co-occurrence narrative count must be an integer");
      }
      c.narratives = crow[k].get<int>();
      row.push_back(c);
    }
    m.push_back(std::move(row));
  }
  return m;
}

std::optional<double> opt_from_json(const json &j, const char *key) {
  if (!j.contains(key) || j[key].is_null()) {
    return std::nullopt;
  }
  if (!j[key].is_number()) {
    throw ParseError(std::string("field ") + key + " must be a number or null");
  }
  return j[key].get<double>();
}

} // namespace

std::string bundle_to_json(const ReportBundle &bundle) {
  bundle.validate();
  ordered_json root;
  root["codebook_version"] = bundle.provenance.codebook_version;
  root["code_ids"] = bundle.code_ids;

  ordered_json prov;
  prov["tool"] = bundle.provenance.tool;
  prov["model_name"] = jstr(bundle.provenance.model_name);
  prov["runs"] = bundle.provenance.runs ? ordered_json(*bundle.provenance.runs)
                                        : ordered_json(nullptr);
  prov["prompt_variant"] = jstr(bundle.provenance.prompt_variant);
  prov["created_at"] = jstr(bundle.provenance.created_at);
  root["provenance"] = std::move(prov);

  if (bundle.evaluation) {
    const EvaluationReport &ev = *bundle.evaluation;
    ordered_json e;
    e["gold_policy"] = std::string(gold_policy_name(ev.gold_policy));
    e["annotators"] = ev.annotator_labels;
    e["narratives"] = ev.narrative_ids;
    ordered_json micro;
    micro["percent_agreement"] = jnum(ev.micro_p_o);
    micro["pabak"] = jnum(ev.micro_pabak);
    micro["kappa"] = jnum(ev.micro_kappa);
    micro["f1"] = jnum(ev.micro_f1);
    e["micro"] = std::move(micro);
    ordered_json macro;
    macro["f1"] = jnum(ev.macro_f1);
    macro["excluded_codes"] = ev.macro_exclusions;
    e["macro"] = std::move(macro);
    ordered_json rows = ordered_json::array();
    for (const CodeMetrics &m : ev.per_code) {
      ordered_json r;
      r["code_id"] = m.code_id;
      r["avg_positive_count"] = m.avg_positive_count;
      r["percent_agreement"] = m.p_o;
      r["pabak"] = m.pabak;
      r["kappa"] = jnum(m.kappa);
      r["precision"] = jnum(m.precision);
      r["recall"] = jnum(m.recall);
      r["f1_positive"] = jnum(m.f1_positive);
      r["f1_weighted"] = jnum(m.f1_weighted);
      r["support"] = m.support;
      rows.push_back(std::move(r));
    }
    e["per_code"] = std::move(rows);
    root["evaluation"] = std::move(e);
  } else {
    root["evaluation"] = nullptr;
  }

  if (bundle.frequencies) {
    ordered_json f;
    f["narratives"] = bundle.frequencies->narratives;
    f["percent"] = bundle.frequencies->percent;
    root["frequencies"] = std::move(f);
  } else {
    root["frequencies"] = nullptr;
  }

  root["pearson"] =
      bundle.pearson ? cooccurrence_to_json(*bundle.pearson) : ordered_json(nullptr);
  root["jaccard"] =
      bundle.jaccard ? cooccurrence_to_json(*bundle.jaccard) : ordered_json(nullptr);
  return root.dump(2) + "\n";
}

ReportBundle parse_bundle(std::string_view json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw ParseError("report bundle is not a JSON object");
  }
  ReportBundle bundle;
  if (!root.contains("codebook_version") || !root["codebook_version"].is_string()) {
    throw ParseError("report bundle lacks codebook_version");
  }
  bundle.provenance.codebook_version = root["codebook_version"].get<std::string>();
  if (!root.contains("code_ids") || !root["code_ids"].is_array()) {
    throw ParseError("report bundle lacks code_ids");
  }
  for (const json &id : root["code_ids"]) {
    if (!id.is_string()) {
      throw ParseError("code_ids must be strings");
    }
    bundle.code_ids.push_back(id.get<std::string>());
  }
  if (root.contains("provenance") && root["provenance"].is_object()) {
    const json &prov = root["provenance"];
    if (prov.contains("tool") && prov["tool"].is_string()) {
      bundle.provenance.tool = prov["tool"].get<std::string>();
    }
    if (prov.contains("model_name") && prov["model_name"].is_string()) {
      bundle.provenance.model_name = prov["model_name"].get<std::string>();
    }
    if (prov.contains("runs") && prov["runs"].is_number_integer()) {
      bundle.provenance.runs = prov["runs"].get<int>();
    }
    if (prov.contains("prompt_variant") && prov["prompt_variant"].is_string()) {
      bundle.provenance.prompt_variant = prov["prompt_variant"].get<std::string>();
    }
    if (prov.contains("created_at") && prov["created_at"].is_string()) {
      bundle.provenance.created_at = prov["created_at"].get<std::string>();
    }
  }

  if (root.contains("evaluation") && !root["evaluation"].is_null()) {
    const json &e = root["evaluation"];
    EvaluationReport ev;
    if (!e.contains("gold_policy") || !e["gold_policy"].is_string()) {
      throw ParseError("evaluation section lacks gold_policy");
    }
    ev.gold_policy = gold_policy_from_name(e["gold_policy"].get<std::string>());
    if (e.contains("annotators") && e["annotators"].is_array()) {
      for (const json &a : e["annotators"]) {
        ev.annotator_labels.push_back(a.get<std::string>());
      }
    }
    if (e.contains("narratives") && e["narratives"].is_array()) {
      for (const json &n : e["narratives"]) {
        ev.narrative_ids.push_back(n.get<std::string>());
      }
    }
    if (e.contains("micro") && e["micro"].is_object()) {
      ev.micro_p_o = opt_from_json(e["micro"], "percent_agreement");
      ev.micro_pabak = opt_from_json(e["micro"], "pabak");
      ev.micro_kappa = opt_from_json(e["micro"], "kappa");
      ev.micro_f1 = opt_from_json(e["micro"], "f1");
    }
    if (e.contains("macro") && e["macro"].is_object()) {
      ev.macro_f1 = opt_from_json(e["macro"], "f1");
      if (e["macro"].contains("excluded_codes")) {
        ev.macro_exclusions = e["macro"]["excluded_codes"].get<int>();
      }
    }
    if (!e.contains("per_code") || !e["per_code"].is_array()) {
      throw ParseError("evaluation section lacks per_code rows");
    }
    for (const json &r : e["per_code"]) {
      CodeMetrics m;
      m.code_id = r.at("code_id").get<std::string>();
      m.avg_positive_count = r.at("avg_positive_count").get<double>();
      m.p_o = r.at("percent_agreement").get<double>();
      m.pabak = r.at("pabak").get<double>();
      m.kappa = opt_from_json(r, "kappa");
      m.precision = opt_from_json(r, "precision");
      m.recall = opt_from_json(r, "recall");
      m.f1_positive = opt_from_json(r, "f1_positive");
      m.f1_weighted = opt_from_json(r, "f1_weighted");
      if (r.contains("support")) {
        m.support = r["support"].get<long long>();
      }
      ev.per_code.push_back(std::move(m));
    }
    bundle.evaluation = std::move(ev);
  }

  if (root.contains("frequencies") && !root["frequencies"].is_null()) {
    const json &f = root["frequencies"];
    FrequencyTable table;
    if (f.contains("narratives") && f["narratives"].is_number_integer()) {
      table.narratives = f["narratives"].get<int>();
    }
    if (!f.contains("percent") || !f["percent"].is_array()) {
      throw ParseError("frequency section lacks percent values");
    }
    for (const json &v : f["percent"]) {
      table.percent.push_back(v.get<double>());
    }
    bundle.frequencies = std::move(table);
  }

  if (root.contains("pearson") && !root["pearson"].is_null()) {
    bundle.pearson = cooccurrence_from_json(root["pearson"]);
  }
  if (root.contains("jaccard") && !root["jaccard"].is_null()) {
    bundle.jaccard = cooccurrence_from_json(root["jaccard"]);
  }

  try {
    bundle.validate();
  } catch (const ValidationError &e) {
    throw ParseError(std::string("report bundle is inconsistent: ") + e.what());
  }
  return bundle;
}

ReportBundle load_bundle(const std::filesystem::path &path) {
  return parse_bundle(read_file(path));
}

void save_bundle(const ReportBundle &bundle, const std::filesystem::path &path) {
  write_file(path, bundle_to_json(bundle));
}

std::string metrics_csv(const ReportBundle &bundle) {
  bundle.validate();
  if (!bundle.evaluation) {
    throw ValidationError("bundle has no evaluation section for metrics.csv");
  }
  const EvaluationReport &ev = *bundle.evaluation;
  std::string csv = "code,avg_positive_count,percent_agreement,pabak,kappa,precision,recall,"
                    "f1_positive,f1_weighted\n";
  std::vector<std::optional<double>> p_o, pabak_col, kappa_col, prec, rec, f1p, f1w;
  for (const CodeMetrics &m : ev.per_code) {
    csv += m.code_id + "," + format_fixed(m.avg_positive_count, kDecimals) + "," +
           format_fixed(m.p_o, kDecimals) + "," + format_fixed(m.pabak, kDecimals) + "," +
           cell(m.kappa) + "," + cell(m.precision) + "," + cell(m.recall) + "," +
           cell(m.f1_positive) + "," + cell(m.f1_weighted) + "\n";
    p_o.push_back(m.p_o);
    pabak_col.push_back(m.pabak);
    kappa_col.push_back(m.kappa);
    prec.push_back(m.precision);
    rec.push_back(m.recall);
    f1p.push_back(m.f1_positive);
    f1w.push_back(m.f1_weighted);
  }
  csv += "global_micro,," + cell(ev.micro_p_o) + "," + cell(ev.micro_pabak) + "," +
         cell(ev.micro_kappa) + ",,," + cell(ev.micro_f1) + ",\n";
  csv += "macro_average,," + cell(mean_defined(p_o)) + "," + cell(mean_defined(pabak_col)) +
         "," + cell(mean_defined(kappa_col)) + "," + cell(mean_defined(prec)) + "," +
         cell(mean_defined(rec)) + "," + cell(ev.macro_f1) + "," + cell(mean_defined(f1w)) +
         "\n";
  return csv;
}

std::string frequencies_csv(const ReportBundle &bundle) {
  bundle.validate();
  if (!bundle.frequencies) {
    throw ValidationError("bundle has no frequency section for frequencies.csv");
  }
  std::string csv = "code,frequency_percent\n";
  for (std::size_t i = 0; i < bundle.code_ids.size(); ++i) {
    csv += bundle.code_ids[i] + "," +
           format_fixed(bundle.frequencies->percent[i], kDecimals) + "\n";
  }
  return csv;
}

std::string cooccurrence_csv(const CooccurrenceMatrix &matrix,
                             const std::vector<std::string> &code_ids) {
  if (matrix.size() != code_ids.size()) {
    throw ValidationError("co-occurrence matrix size differs from code ids");
  }
  std::string csv = "code";
  for (const std::string &id : code_ids) {
    csv += "," + id;
  }
  csv += "\n";
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    csv += code_ids[i];
    for (const CooccurrenceCell &c : matrix[i]) {
      csv += "," + cell(c.value);
    }
    csv += "\n";
  }
  return csv;
}

std::vector<std::filesystem::path> write_report(const ReportBundle &bundle,
                                                const std::filesystem::path &out_dir,
                                                const ReportFormats &formats) {
  bundle.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  }
  std::vector<std::filesystem::path> written;
  if (formats.csv) {
    if (bundle.evaluation) {
      std::filesystem::path p = out_dir / "metrics.csv";
      write_file(p, metrics_csv(bundle));
      written.push_back(p);
    }
    if (bundle.frequencies) {
      std::filesystem::path p = out_dir / "frequencies.csv";
      write_file(p, frequencies_csv(bundle));
      written.push_back(p);
    }
    if (bundle.pearson) {
      std::filesystem::path p = out_dir / "pearson.csv";
      write_file(p, cooccurrence_csv(*bundle.pearson, bundle.code_ids));
      written.push_back(p);
    }
    if (bundle.jaccard) {
      std::filesystem::path p = out_dir / "jaccard.csv";
      write_file(p, cooccurrence_csv(*bundle.jaccard, bundle.code_ids));
      written.push_back(p);
    }
  }
  if (formats.json) {
    std::filesystem::path p = out_dir / "report.json";
    write_file(p, bundle_to_json(bundle));
    written.push_back(p);
  }
  return written;
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(std::move(current));
  return cells;
}

std::optional<double> parse_cell(const std::string &s, std::size_t line_no) {
  if (s.empty()) {
    return std::nullopt;
  }
  double value = 0.0;
  const char *begin = s.data();
  const char *end = s.data() + s.size();
  std::from_chars_result res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("metrics CSV line " + std::to_string(line_no) + " has a non-numeric cell \"" +
                     s + "\"");
  }
  return value;
}

} // namespace

std::vector<MetricsCsvRow> parse_metrics_csv(std::string_view text) {
  const std::string expected_header = "code,avg_positive_count,percent_agreement,pabak,kappa,"
                                      "precision,recall,f1_positive,f1_weighted";
  std::vector<MetricsCsvRow> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (line_no == 1) {
      if (line != expected_header) {
        throw ParseError("metrics CSV header mismatch");
      }
      continue;
    }
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != 9) {
      throw ParseError("metrics CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected 9");
    }
    MetricsCsvRow row;
    row.code = cells[0];
    row.avg_positive_count = parse_cell(cells[1], line_no);
    row.p_o = parse_cell(cells[2], line_no);
    row.pabak = parse_cell(cells[3], line_no);
    row.kappa = parse_cell(cells[4], line_no);
    row.precision = parse_cell(cells[5], line_no);
    row.recall = parse_cell(cells[6], line_no);
    row.f1_positive = parse_cell(cells[7], line_no);
    row.f1_weighted = parse_cell(cells[8], line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError("metrics CSV has no data rows");
  }
  return rows;
}

} // namespace pncoder
