#include "thermotrack/eval.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace thermotrack {
namespace {

// Reports need fixed 6-decimal floats, which the json library does not offer,
// so documents are assembled here and the library only escapes strings.
class JsonWriter {
 public:
  JsonWriter& open(char bracket) {
    separate();
    out_ << bracket;
    first_ = true;
    return *this;
  }
  JsonWriter& close(char bracket) {
    out_ << bracket;
    first_ = false;
    return *this;
  }
  JsonWriter& key(const std::string& k) {
    separate();
    out_ << nlohmann::json(k).dump() << ':';
    first_ = true;  // the value follows without a comma
    return *this;
  }
  JsonWriter& number(double v) {
    separate();
    out_ << fixed(v);
    return *this;
  }
  JsonWriter& integer(long long v) {
    separate();
    out_ << v;
    return *this;
  }
  JsonWriter& string(const std::string& s) {
    separate();
    out_ << nlohmann::json(s).dump();
    return *this;
  }
  JsonWriter& null() {
    separate();
    out_ << "null";
    return *this;
  }
  std::string str() const { return out_.str() + "\n"; }

  static std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
  }

 private:
  void separate() {
    if (!first_) out_ << ',';
    first_ = false;
  }
  std::ostringstream out_;
  bool first_ = true;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

void write_indices(JsonWriter& w, const std::vector<std::size_t>& v) {
  w.open('[');
  for (std::size_t i : v) w.integer(static_cast<long long>(i));
  w.close(']');
}

void write_curve(JsonWriter& w, const EAOCurve& c) {
  w.open('{');
  w.key("eao").number(c.eao);
  w.key("interval").open('[').integer(c.low).integer(c.high).close(']');
  w.key("segments").integer(static_cast<long long>(c.segments));
  w.close('}');
}

}  // namespace

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::io, "cannot create " + dir.string() + ": " + ec.message());

  JsonWriter w;
  w.open('{');
  w.key("version").string(THERMOTRACK_VERSION);
  if (!report.vot.empty()) {
    w.key("vot").open('{');
    w.key("accuracy").number(accuracy(report.vot, report.burn_in));
    w.key("robustness").number(robustness(report.vot));
    if (report.eao_curve) {
      w.key("eao").number(report.eao_curve->eao);
      w.key("eao_interval").open('[').integer(report.eao_curve->low).integer(report.eao_curve->high).close(']');
    }
    w.key("sequences").open('[');
    for (const auto& run : report.vot) {
      w.open('{');
      w.key("name").string(run.sequence);
      w.key("frames").integer(static_cast<long long>(run.size()));
      w.key("failures");
      write_indices(w, run.failures);
      w.key("reinits");
      write_indices(w, run.reinits);
      w.key("accuracy");
      try {
        w.number(accuracy({run}, report.burn_in));
      } catch (const Error&) {
        w.null();
      }
      w.close('}');
    }
    w.close(']').close('}');
  }
  if (!report.ope.empty()) {
    w.key("ope").open('{');
    if (report.success) w.key("auc").number(report.success->auc);
    w.key("sequences").open('[');
    for (const auto& run : report.ope) {
      w.open('{');
      w.key("name").string(run.sequence);
      w.key("frames").integer(static_cast<long long>(run.size()));
      w.key("auc").number(ope_success(run).auc);
      w.close('}');
    }
    w.close(']').close('}');
  }
  w.close('}');
  write_file(dir / "report.json", w.str());

  if (report.eao_curve) {
    std::string csv = "n,phi\n";
    for (std::size_t n = 0; n < report.eao_curve->phi.size(); ++n)
      csv += std::to_string(n + 1) + "," + JsonWriter::fixed(report.eao_curve->phi[n]) + "\n";
    write_file(dir / "eao_curve.csv", csv);

    JsonWriter a;
    a.open('{');
    for (const auto& [tag, curve] : report.attributes) {
      a.key(tag);
      write_curve(a, curve);
    }
    a.close('}');
    write_file(dir / "attributes.json", a.str());
  }
  if (report.success) {
    std::string csv = "threshold,success\n";
    for (std::size_t i = 0; i < report.success->success.size(); ++i)
      csv += JsonWriter::fixed(report.success->thresholds[i]) + "," + JsonWriter::fixed(report.success->success[i]) + "\n";
    write_file(dir / "success_curve.csv", csv);
  }
}

}  // namespace thermotrack
