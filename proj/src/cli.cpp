#include "rankr/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rankr/decompositions.hpp"
#include "rankr/isometries.hpp"
#include "rankr/kernel.hpp"

namespace rankr::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIllConditionedCell:
    case ErrorCode::kIllConditionedSpectrum:
    case ErrorCode::kNoConvergence:
    case ErrorCode::kSingularMatrix:
    case ErrorCode::kOverflow:
      return kNumerical;
    case ErrorCode::kPowerExhausted:
      return kPowerExhausted;
    case ErrorCode::kEmptySample:
      return kEmptySample;
    default:
      return kMalformed;
  }
}

namespace {

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::kMalformedInput, what); }

double number(const json& j, const std::string& where) {
  if (!j.is_number()) malformed(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) malformed(where + ": not finite");
  return x;
}

Vec vec_from(const json& j, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) malformed(where + ": expected " + std::to_string(n) + " numbers");
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = number(j[static_cast<std::size_t>(i)], where);
  return v;
}

Mat mat_from(const json& j, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) malformed(where + ": expected " + std::to_string(n) + " rows");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    const Vec row = vec_from(j[static_cast<std::size_t>(i)], n, where);
    for (int k = 0; k < n; ++k) m(i, k) = row[k];
  }
  return m;
}

Mat diag_exp(const Vec& h) {
  Vec e(h.size());
  for (int i = 0; i < h.size(); ++i) e[i] = std::exp(h[i]);
  return Mat::diagonal(e);
}

json to_json(const Vec& v) {
  json j = json::array();
  for (double x : v) j.push_back(x);
  return j;
}

json to_json(const Mat& m) {
  json j = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

struct TolField {
  const char* key;
  double Tolerances::*field;
};

constexpr TolField kTolFields[] = {
    {"det", &Tolerances::det},
    {"lin", &Tolerances::lin},
    {"wall", &Tolerances::wall},
    {"rank", &Tolerances::rank},
    {"transverse", &Tolerances::transverse},
    {"eig_cluster", &Tolerances::eig_cluster},
    {"spectrum_condition", &Tolerances::spectrum_condition},
    {"translation", &Tolerances::translation},
    {"unipotent", &Tolerances::unipotent},
};

Tolerances tolerances_from(const json& j) {
  Tolerances t = default_tolerances();
  if (j.is_null()) return t;
  if (!j.is_object()) malformed("tolerances: expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const TolField& f : kTolFields) {
      if (key == f.key) {
        t.*f.field = number(value, "tolerances." + key);
        known = true;
      }
    }
    if (key == "jacobi_sweep_factor") {
      t.jacobi_sweep_factor = static_cast<int>(number(value, "tolerances." + key));
      known = true;
    }
    if (!known) malformed("tolerances: unknown key " + key);
  }
  return t;
}

json tolerances_to_json(const Tolerances& t) {
  json j = json::object();
  for (const TolField& f : kTolFields) j[f.key] = t.*f.field;
  j["jacobi_sweep_factor"] = t.jacobi_sweep_factor;
  return j;
}

Flag flag_from_frame(const Mat& frame, const Tolerances& tol, const std::string& where) {
  try {
    return Flag::from_frame(frame, tol);
  } catch (const Error& e) {
    malformed(where + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) malformed("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    malformed(where + ": " + e.what());
  }
}

}  // namespace

GroupSpec parse_spec(const json& j) {
  if (!j.is_object()) malformed("spec: expected an object");
  GroupSpec s;
  if (!j.contains("n")) malformed("spec: missing n");
  s.n = static_cast<int>(number(j["n"], "n"));
  if (s.n < 2 || s.n > kMaxDim || number(j["n"], "n") != s.n) malformed("n must be an integer in [2, 8]");
  s.tol = tolerances_from(j.value("tolerances", json()));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) malformed("seed: expected an unsigned integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "n" && key != "tolerances" && key != "seed" && key != "generators" && key != "schottky") {
      malformed("spec: unknown key " + key);
    }
  }
  const bool has_generators = j.contains("generators");
  const bool has_recipe = j.contains("schottky");
  if (has_generators == has_recipe) malformed("spec: exactly one of generators and schottky is required");
  if (has_generators) {
    const json& g = j["generators"];
    if (!g.is_array() || g.empty()) malformed("generators: expected a non-empty array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string where = "generators[" + std::to_string(i) + "]";
      if (!g[i].is_object() || !g[i].contains("matrix")) malformed(where + ": expected {name, matrix}");
      NamedMatrix m;
      m.name = g[i].value("name", std::string(1, static_cast<char>('a' + i)));
      if (!names.insert(m.name).second) malformed(where + ": duplicate name " + m.name);
      m.matrix = mat_from(g[i]["matrix"], s.n, where);
      if (std::abs(det(m.matrix) - 1.0) > s.tol.det) malformed(where + ": determinant is not 1");
      s.generators.push_back(std::move(m));
    }
  } else {
    const json& r = j["schottky"];
    if (!r.is_object()) malformed("schottky: expected an object");
    Recipe recipe;
    for (const auto& [key, value] : r.items()) {
      if (key == "flags") {
        if (!value.is_array()) malformed("schottky.flags: expected an array");
        for (std::size_t i = 0; i < value.size(); ++i) {
          recipe.flags.push_back(mat_from(value[i], s.n, "schottky.flags[" + std::to_string(i) + "]"));
        }
      } else if (key == "L") {
        if (!value.is_array()) malformed("schottky.L: expected an array");
        for (std::size_t i = 0; i < value.size(); ++i) {
          recipe.l.push_back(vec_from(value[i], s.n, "schottky.L[" + std::to_string(i) + "]"));
        }
      } else if (key == "parabolic_flags") {
        if (!value.is_array()) malformed("schottky.parabolic_flags: expected an array");
        for (std::size_t i = 0; i < value.size(); ++i) {
          recipe.parabolic_flags.push_back(
              mat_from(value[i], s.n, "schottky.parabolic_flags[" + std::to_string(i) + "]"));
        }
      } else if (key == "radius_policy") {
        recipe.radius_policy = number(value, key);
      } else if (key == "radius_scale") {
        recipe.radius_scale = number(value, key);
      } else if (key == "k_max") {
        recipe.k_max = static_cast<int>(number(value, key));
      } else if (key == "resolution") {
        recipe.resolution = static_cast<int>(number(value, key));
      } else {
        malformed("schottky: unknown key " + key);
      }
    }
    if (recipe.flags.size() != 2 * recipe.l.size()) malformed("schottky: need two flags per L vector");
    if (recipe.flags.empty() && recipe.parabolic_flags.empty()) malformed("schottky: no generators");
    if (recipe.radius_policy <= 0 || recipe.radius_scale <= 0 || recipe.k_max < 1 || recipe.resolution < 1) {
      malformed("schottky: radius_policy, radius_scale, k_max and resolution must be positive");
    }
    for (std::size_t i = 0; i < recipe.flags.size(); ++i) {
      flag_from_frame(recipe.flags[i], s.tol, "schottky.flags[" + std::to_string(i) + "]");
    }
    for (std::size_t i = 0; i < recipe.parabolic_flags.size(); ++i) {
      flag_from_frame(recipe.parabolic_flags[i], s.tol, "schottky.parabolic_flags[" + std::to_string(i) + "]");
    }
    s.schottky = std::move(recipe);
  }
  return s;
}

json spec_to_json(const GroupSpec& spec) {
  json j;
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  j["tolerances"] = tolerances_to_json(spec.tol);
  if (spec.schottky) {
    const Recipe& r = *spec.schottky;
    json s;
    s["flags"] = json::array();
    for (const Mat& m : r.flags) s["flags"].push_back(to_json(m));
    s["L"] = json::array();
    for (const Vec& v : r.l) s["L"].push_back(to_json(v));
    s["parabolic_flags"] = json::array();
    for (const Mat& m : r.parabolic_flags) s["parabolic_flags"].push_back(to_json(m));
    s["radius_policy"] = r.radius_policy;
    s["radius_scale"] = r.radius_scale;
    s["k_max"] = r.k_max;
    s["resolution"] = r.resolution;
    j["schottky"] = s;
  } else {
    j["generators"] = json::array();
    for (const NamedMatrix& g : spec.generators) j["generators"].push_back({{"name", g.name}, {"matrix", to_json(g.matrix)}});
  }
  return j;
}

GroupSpec load_spec(const std::string& path) { return parse_spec(parse_json_text(read_file(path), path)); }

json table_to_json(const PingPongTable& t) {
  json j;
  j["n"] = t.n();
  j["axial"] = t.axial;
  j["points"] = json::array();
  for (const BoundaryPoint& p : t.points) {
    j["points"].push_back({{"frame", to_json(p.flag.frame())}, {"direction", to_json(p.direction)}});
  }
  j["neighborhoods"] = json::array();
  for (const Neighborhood& u : t.neighborhoods) {
    j["neighborhoods"].push_back({{"center", to_json(u.center.frame())}, {"radius", u.radius}});
  }
  j["bases"] = json::array();
  for (const Mat& b : t.bases) j["bases"].push_back(to_json(b));
  j["powers"] = t.powers;
  return j;
}

PingPongTable table_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("axial") || !j.contains("points") ||
      !j.contains("neighborhoods") || !j.contains("bases") || !j.contains("powers")) {
    malformed("table: expected n, axial, points, neighborhoods, bases, powers");
  }
  const int n = static_cast<int>(number(j["n"], "n"));
  if (n < 2 || n > kMaxDim) malformed("table: n out of range");
  const Tolerances& tol = default_tolerances();
  PingPongTable t;
  t.axial = static_cast<int>(number(j["axial"], "axial"));
  for (const json& p : j["points"]) {
    if (!p.is_object()) malformed("table.points: expected objects");
    t.points.push_back(
        BoundaryPoint{flag_from_frame(mat_from(p["frame"], n, "point frame"), tol, "point frame"),
                      vec_from(p["direction"], n, "point direction")});
  }
  for (const json& u : j["neighborhoods"]) {
    if (!u.is_object()) malformed("table.neighborhoods: expected objects");
    t.neighborhoods.push_back(
        {flag_from_frame(mat_from(u["center"], n, "center"), tol, "center"), number(u["radius"], "radius")});
  }
  for (const json& b : j["bases"]) t.bases.push_back(mat_from(b, n, "base"));
  for (const json& k : j["powers"]) t.powers.push_back(static_cast<int>(number(k, "power")));
  const std::size_t g = t.bases.size();
  if (t.powers.size() != g || t.axial < 0 || static_cast<std::size_t>(t.axial) > g ||
      t.points.size() != g + static_cast<std::size_t>(t.axial) || t.neighborhoods.size() != t.points.size()) {
    malformed("table: inconsistent sizes");
  }
  return t;
}

PingPongTable build_from_recipe(const GroupSpec& spec) {
  if (!spec.schottky) malformed("spec has no schottky recipe");
  const Recipe& r = *spec.schottky;
  std::vector<Flag> flags;
  for (const Mat& m : r.flags) flags.push_back(Flag::from_frame(m, spec.tol));
  for (const Mat& m : r.parabolic_flags) flags.push_back(Flag::from_frame(m, spec.tol));
  PingPongTable t = build_table(flags, r.l, BuildOptions{r.radius_policy, r.k_max, r.resolution, spec.seed}, spec.tol);
  for (Neighborhood& u : t.neighborhoods) u.radius *= r.radius_scale;
  return t;
}

std::uint64_t config_hash(const json& config) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const Table& t) {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) s.push_back(',');
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n\r") == std::string::npos) {
        s += c;
        continue;
      }
      s.push_back('"');
      for (char ch : c) {
        if (ch == '"') s.push_back('"');
        s.push_back(ch);
      }
      s.push_back('"');
    }
    s.push_back('\n');
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return s;
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool pending = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch != '"') {
        cell.push_back(ch);
      } else if (i + 1 < text.size() && text[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else {
        quoted = false;
      }
      continue;
    }
    pending = true;
    if (ch == '"' && cell.empty()) {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\n') {
      cells.push_back(std::move(cell));
      cell.clear();
      lines.push_back(std::move(cells));
      cells.clear();
      pending = false;
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) malformed("csv: unterminated quote");
  if (pending) {
    cells.push_back(std::move(cell));
    lines.push_back(std::move(cells));
  }
  if (lines.empty()) malformed("csv: missing header");
  Table t;
  t.header = std::move(lines.front());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].size() != t.header.size()) malformed("csv: row width differs from header");
    t.rows.push_back(std::move(lines[i]));
  }
  return t;
}

json row_to_json(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  if (header.size() != row.size()) malformed("row width differs from header");
  json j = json::object();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& c = row[i];
    if (c.empty()) {
      j[header[i]] = nullptr;
      continue;
    }
    char* end = nullptr;
    const double x = std::strtod(c.c_str(), &end);
    const bool numeric = end == c.c_str() + c.size() && format_number(x) == c;
    if (numeric && header[i] == "length") {
      j[header[i]] = static_cast<long long>(x);
    } else if (numeric) {
      j[header[i]] = x;
    } else {
      j[header[i]] = c;
    }
  }
  return j;
}

std::vector<std::string> row_from_json(const std::vector<std::string>& header, const json& j) {
  std::vector<std::string> row;
  for (const std::string& h : header) {
    if (!j.contains(h)) malformed("row is missing " + h);
    const json& v = j[h];
    if (v.is_null()) {
      row.emplace_back();
    } else if (v.is_number_integer()) {
      row.push_back(std::to_string(v.get<long long>()));
    } else if (v.is_number()) {
      row.push_back(format_number(v.get<double>()));
    } else if (v.is_string()) {
      row.push_back(v.get<std::string>());
    } else {
      malformed("row cell " + h + " has an unsupported type");
    }
  }
  return row;
}

json table_to_rows_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(row_to_json(t.header, r));
  return {{"columns", t.header}, {"rows", rows}};
}

Table samples_table(const std::vector<LimitSample>& samples, int n, const PingPongTable* table) {
  Table t;
  t.header = {"word", "length", "class"};
  for (int i = 1; i <= n; ++i) t.header.push_back("dir_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) t.header.push_back("jdir_" + std::to_string(i));
  if (table) t.header.push_back("flag_dist_to_nearest_U");
  for (const LimitSample& s : samples) {
    std::vector<std::string> r{word_name(s.word), std::to_string(s.length)};
    if (s.word.empty()) {
      r.push_back("identity");
    } else {
      r.push_back(s.kind ? std::string(to_string(*s.kind)) : std::string("unknown"));
    }
    for (int i = 0; i < n; ++i) r.push_back(format_number(s.cartan_direction[i]));
    for (int i = 0; i < n; ++i) r.push_back(s.jordan_direction ? format_number((*s.jordan_direction)[i]) : "");
    if (table) {
      double best = std::numeric_limits<double>::infinity();
      for (const Neighborhood& u : table->neighborhoods) {
        best = std::min(best, flag_distance(s.angular_flag, u.center) - u.radius);
      }
      r.push_back(format_number(best));
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::string directions_svg(int n, const std::vector<CartanVec>& dots, const std::vector<CartanVec>& crosses,
                           const std::string& title) {
  if (n != 2 && n != 3) fail(ErrorCode::kInvalidArgument, "the direction chart needs n = 2 or 3");
  constexpr double kSize = 400.0, kPad = 40.0;
  auto chart = [&](const CartanVec& h) {
    if (n == 2) return std::pair<double, double>{0.5, 0.5};
    const double span = h[0] - h[2];
    if (span <= 0.0) return std::pair<double, double>{0.5, 0.5};
    return std::pair<double, double>{(h[0] - h[1]) / span, (h[1] - h[2]) / span};
  };
  auto px = [&](double x) { return kPad + x * (kSize - 2 * kPad); };
  auto py = [&](double y) { return kSize - kPad - y * (kSize - 2 * kPad); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::set<std::pair<std::string, std::string>> dot_set, cross_set;
  for (const CartanVec& h : dots) {
    const auto [x, y] = chart(h);
    dot_set.emplace(fmt(px(x)), fmt(py(y)));
  }
  for (const CartanVec& h : crosses) {
    const auto [x, y] = chart(h);
    cross_set.emplace(fmt(px(x)), fmt(py(y)));
  }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  s << "<title>" << title << "</title>\n";
  s << "<rect width=\"400\" height=\"400\" fill=\"white\"/>\n";
  s << "<line x1=\"" << fmt(px(0)) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(px(1)) << "\" y2=\"" << fmt(py(0))
    << "\" stroke=\"#999\"/>\n";
  s << "<line x1=\"" << fmt(px(0)) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(px(0)) << "\" y2=\"" << fmt(py(1))
    << "\" stroke=\"#999\"/>\n";
  s << "<line x1=\"" << fmt(px(1)) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(px(0)) << "\" y2=\"" << fmt(py(1))
    << "\" stroke=\"#333\"/>\n";
  s << "<text x=\"" << fmt(px(1)) << "\" y=\"" << fmt(py(0) + 20) << "\" font-size=\"12\">h1-h2</text>\n";
  s << "<text x=\"" << fmt(px(0) - 30) << "\" y=\"" << fmt(py(1) - 8) << "\" font-size=\"12\">h2-h3</text>\n";
  for (const auto& [x, y] : dot_set) s << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"#1f77b4\"/>\n";
  for (const auto& [x, y] : cross_set) {
    const double cx = std::stod(x), cy = std::stod(y);
    s << "<path d=\"M" << fmt(cx - 3) << " " << fmt(cy - 3) << "L" << fmt(cx + 3) << " " << fmt(cy + 3) << "M"
      << fmt(cx - 3) << " " << fmt(cy + 3) << "L" << fmt(cx + 3) << " " << fmt(cy - 3)
      << "\" stroke=\"#d62728\" stroke-width=\"1.2\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

namespace {

struct Common {
  std::string input;
  std::string out;
  std::optional<int> max_length;
  std::optional<int> min_length;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  std::string format = "csv";
};

struct Context {
  json report = json::object();
  json config = json::object();
  std::vector<std::string> outputs;
  fs::path out_dir;

  void check(const std::string& name, bool pass) {
    report["checks"].push_back({{"name", name}, {"status", pass ? "pass" : "fail"}});
  }
  void emit(const std::string& name, const std::string& text) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    const fs::path p = out_dir / name;
    write_file(p, text);
    outputs.push_back(p.string());
  }
};

int resolve_threads(int requested) {
  if (const char* env = std::getenv("RANKR_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return resolve_workers(requested);
}

json vec_list(const std::vector<double>& v) {
  json j = json::array();
  for (double x : v) j.push_back(x);
  return j;
}

void write_table_output(Context& ctx, const std::string& stem, const Table& t, const std::string& format) {
  if (format == "csv") {
    ctx.emit(stem + ".csv", to_csv(t));
  } else if (format == "json") {
    ctx.emit(stem + ".json", table_to_rows_json(t).dump(1) + "\n");
  } else {
    fail(ErrorCode::kInvalidArgument, "format " + format + " is not available here");
  }
}

Alphabet alphabet_for(const GroupSpec& spec, std::optional<PingPongTable>& table) {
  if (spec.schottky) {
    table = build_from_recipe(spec);
    return Alphabet::from_table(*table);
  }
  std::vector<Mat> g;
  for (const NamedMatrix& m : spec.generators) g.push_back(m.matrix);
  return Alphabet::from_generators(g);
}

const PingPongTable& require_table(const std::optional<PingPongTable>& table) {
  if (!table) fail(ErrorCode::kMalformedInput, "this check needs a schottky recipe");
  return *table;
}

void run_decompose(Context& ctx, const std::string& which, const std::string& matrix_text, const std::string& input,
                   const std::string& generator) {
  Mat g;
  Tolerances tol = default_tolerances();
  if (!matrix_text.empty()) {
    const json j = parse_json_text(matrix_text, "--matrix");
    if (!j.is_array() || j.empty()) malformed("--matrix: expected a square array");
    const int n = static_cast<int>(j.size());
    if (n < 2 || n > kMaxDim) malformed("--matrix: n must be in [2, 8]");
    g = mat_from(j, n, "--matrix");
    if (std::abs(det(g) - 1.0) > tol.det) malformed("--matrix: determinant is not 1");
    ctx.config["matrix"] = j;
  } else {
    if (input.empty()) malformed("decompose needs --matrix or --input");
    const GroupSpec spec = load_spec(input);
    tol = spec.tol;
    if (spec.generators.empty()) malformed("decompose needs a spec with generators");
    const NamedMatrix* pick = &spec.generators.front();
    if (!generator.empty()) {
      pick = nullptr;
      for (const NamedMatrix& m : spec.generators) {
        if (m.name == generator) pick = &m;
      }
      if (!pick) malformed("no generator named " + generator);
    }
    g = pick->matrix;
    ctx.config["spec"] = spec_to_json(spec);
    ctx.config["generator"] = pick->name;
  }
  ctx.config["which"] = which;
  json r;
  const double scale = frobenius_norm(g);
  if (which == "kak") {
    const KAK d = cartan_decompose(g, tol);
    const double res = frobenius_norm(d.k1 * diag_exp(d.h) * d.k2 - g);
    r = {{"k1", to_json(d.k1)}, {"h", to_json(d.h)}, {"k2", to_json(d.k2)}, {"residual", res}};
    ctx.check("reconstruction", res <= 1e-8 * scale);
  } else if (which == "kan") {
    const KAN d = iwasawa(g, tol);
    const double res = frobenius_norm(d.k * diag_exp(d.a) * d.nplus - g);
    r = {{"k", to_json(d.k)}, {"a", to_json(d.a)}, {"nplus", to_json(d.nplus)}, {"residual", res}};
    ctx.check("reconstruction", res <= 1e-8 * scale);
  } else if (which == "jordan") {
    const SpectralAnalysis a = analyze(g, tol);
    const JordanParts& p = a.parts;
    const double res = frobenius_norm(p.e * p.h * p.u - g);
    const double comm = std::max({frobenius_norm(commutator(p.e, p.h)), frobenius_norm(commutator(p.e, p.u)),
                                  frobenius_norm(commutator(p.h, p.u))});
    const IsometryClass c = classify(a, tol);
    r = {{"e", to_json(p.e)},
         {"h", to_json(p.h)},
         {"u", to_json(p.u)},
         {"class", std::string(to_string(c.kind))},
         {"translation", to_json(c.translation)},
         {"residual", res},
         {"commutator_residual", comm}};
    ctx.check("reconstruction", res <= 1e-8 * scale);
    ctx.check("commuting", comm <= 1e-8 * scale * scale);
  } else {
    const WeylElem w = bruhat_cell(g, tol);
    r = {{"w", w.perm}, {"longest", w == longest_element(g.n())}};
  }
  ctx.report["result"] = r;
  ctx.emit("decompose.json", r.dump(1) + "\n");
}

void run_schottky_build(Context& ctx, const Common& c, std::optional<int> resolution) {
  GroupSpec spec = load_spec(c.input);
  if (!spec.schottky) malformed("schottky build needs a schottky recipe");
  if (c.seed) spec.seed = *c.seed;
  ctx.config["spec"] = spec_to_json(spec);
  const int res = resolution.value_or(spec.schottky->resolution);
  ctx.config["resolution"] = res;
  const PingPongTable t = build_from_recipe(spec);
  ctx.emit("table.json", table_to_json(t).dump(1) + "\n");
  const CertificationReport cert = certify_klein(t, res, spec.seed, spec.tol);
  json m;
  m["powers"] = t.powers;
  json radii = json::array();
  for (const Neighborhood& u : t.neighborhoods) radii.push_back(u.radius);
  m["radii"] = radii;
  m["certification"] = std::string(to_string(cert.status));
  m["resolution"] = cert.resolution;
  m["samples_checked"] = cert.samples_checked;
  m["min_margin"] = cert.min_margin;
  m["generator_margins"] = vec_list(cert.generator_margins);
  if (!cert.reason.empty()) m["reason"] = cert.reason;
  if (cert.witness) {
    const Witness& w = *cert.witness;
    m["witness"] = {{"flag", to_json(w.flag.frame())}, {"generator", w.generator}, {"sign", w.sign},
                    {"multiple", w.multiple},          {"source", w.source},      {"target", w.target},
                    {"margin", w.margin}};
  }
  ctx.check("klein", cert.certified());
  if (cert.certified()) {
    const double sep = min_word_separation(t.generators(), 6);
    m["word_separation_6"] = sep;
    ctx.check("word_separation", sep > 1e-6);
    try {
      const NonelementaryReport ne = check_nonelementary(t, spec.tol);
      m["nonelementary"] = ne.nonelementary;
      if (!ne.reason.empty()) m["nonelementary_reason"] = ne.reason;
    } catch (const Error& e) {
      m["nonelementary_reason"] = e.what();
    }
  }
  ctx.report["metrics"] = m;
  if (!cert.certified()) ctx.report["exit_override"] = kCertificationFailed;
}

void run_schottky_check(Context& ctx, const Common& c, std::optional<int> resolution) {
  const json j = parse_json_text(read_file(c.input), c.input);
  const PingPongTable t = table_from_json(j);
  const int res = resolution.value_or(2000);
  const std::uint64_t seed = c.seed.value_or(1);
  ctx.config["table"] = j;
  ctx.config["resolution"] = res;
  ctx.config["seed"] = seed;
  const CertificationReport cert = certify_klein(t, res, seed);
  json m = {{"certification", std::string(to_string(cert.status))},
            {"resolution", cert.resolution},
            {"samples_checked", cert.samples_checked},
            {"min_margin", cert.min_margin},
            {"generator_margins", vec_list(cert.generator_margins)}};
  if (!cert.reason.empty()) m["reason"] = cert.reason;
  if (cert.witness) {
    const Witness& w = *cert.witness;
    m["witness"] = {{"flag", to_json(w.flag.frame())}, {"generator", w.generator}, {"sign", w.sign},
                    {"multiple", w.multiple},          {"source", w.source},      {"target", w.target},
                    {"margin", w.margin}};
  }
  ctx.check("klein", cert.certified());
  ctx.report["metrics"] = m;
  if (!cert.certified()) ctx.report["exit_override"] = kCertificationFailed;
}

struct LimitsetExtra {
  std::vector<int> p_lengths{6, 8, 10};
  std::optional<int> cone_length;
  int target_length = 8;
  int orbit_length = 10;
  int pairs = 200;
};

void run_limitset(Context& ctx, const std::string& sub, const Common& c, const LimitsetExtra& x) {
  GroupSpec spec = load_spec(c.input);
  if (c.seed) spec.seed = *c.seed;
  const int workers = resolve_threads(c.workers);
  if (c.format != "csv" && c.format != "json" && c.format != "svg") malformed("unknown format " + c.format);
  ctx.config["spec"] = spec_to_json(spec);
  ctx.config["format"] = c.format;
  std::optional<PingPongTable> table;
  const Alphabet alphabet = alphabet_for(spec, table);
  const int n = spec.n;
  json m;
  if (sub == "enumerate") {
    EnumerateOptions o;
    o.max_length = c.max_length.value_or(4);
    o.min_length = c.min_length.value_or(0);
    o.workers = workers;
    ctx.config["max_length"] = o.max_length;
    ctx.config["min_length"] = o.min_length;
    const std::vector<LimitSample> samples = enumerate(alphabet, o, spec.tol);
    long overflow = 0;
    for (const LimitSample& s : samples) overflow += s.overflow ? 1 : 0;
    m["samples"] = samples.size();
    m["overflow"] = overflow;
    if (o.min_length == 0) {
      m["expected"] = word_count(alphabet.generator_count(), o.max_length);
      ctx.check("word_count", samples.size() == word_count(alphabet.generator_count(), o.max_length));
    }
    if (c.format == "svg") {
      std::vector<CartanVec> dots, crosses;
      for (const LimitSample& s : samples) {
        if (s.word.empty()) continue;
        dots.push_back(s.cartan_direction);
        if (s.jordan_direction) crosses.push_back(*s.jordan_direction);
      }
      ctx.emit("samples.svg", directions_svg(n, dots, crosses, "Cartan (dots) and Jordan (crosses) directions"));
    } else {
      write_table_output(ctx, "samples", samples_table(samples, n, table ? &*table : nullptr), c.format);
    }
  } else if (sub == "cone") {
    const int cone_length = x.cone_length.value_or(c.max_length.value_or(12));
    ctx.config["p_lengths"] = x.p_lengths;
    ctx.config["cone_length"] = cone_length;
    const ConeReport r = cone_theorem_check(alphabet, x.p_lengths, cone_length, workers, spec.tol);
    m["lengths"] = r.lengths;
    m["forward"] = vec_list(r.forward);
    m["backward"] = vec_list(r.backward);
    m["cone_size"] = r.cone_size;
    m["cone_length"] = r.cone_length;
    bool strict = true;
    for (std::size_t i = 1; i < r.forward.size(); ++i) strict = strict && r.forward[i] < r.forward[i - 1];
    m["strictly_decreasing"] = strict;
    ctx.check("non_increasing", r.non_increasing);
    const std::vector<CartanVec>& cone = r.cone;
    std::vector<std::pair<int, std::vector<CartanVec>>> p;
    for (std::size_t i = 0; i < r.lengths.size(); ++i) p.emplace_back(r.lengths[i], r.p_samples[i]);
    if (c.format == "svg") {
      std::vector<CartanVec> dots;
      for (const auto& [lp, v] : p) dots.insert(dots.end(), v.begin(), v.end());
      ctx.emit("cone.svg", directions_svg(n, dots, cone, "directional sample (dots) and limit cone sample (crosses)"));
    } else {
      Table t;
      t.header = {"set", "length"};
      for (int i = 1; i <= n; ++i) t.header.push_back("dir_" + std::to_string(i));
      auto add = [&](const std::string& set, int len, const std::vector<CartanVec>& v) {
        for (const CartanVec& h : v) {
          std::vector<std::string> row{set, std::to_string(len)};
          for (int i = 0; i < n; ++i) row.push_back(format_number(h[i]));
          t.rows.push_back(std::move(row));
        }
      };
      for (const auto& [lp, v] : p) add("P", lp, v);
      add("cone", cone_length, cone);
      write_table_output(ctx, "cone", t, c.format);
    }
  } else if (sub == "minimality") {
    MinimalityOptions o;
    o.target_length = x.target_length;
    o.orbit_length = x.orbit_length;
    o.eps = c.tol.value_or(0.05);
    o.containment_min = c.min_length.value_or(2);
    o.containment_max = c.max_length.value_or(8);
    o.workers = workers;
    ctx.config["minimality"] = {{"target_length", o.target_length}, {"orbit_length", o.orbit_length},
                                {"eps", o.eps},                     {"containment_min", o.containment_min},
                                {"containment_max", o.containment_max}};
    const MinimalityReport r = minimality_check(require_table(table), o, spec.tol);
    m = {{"targets", r.targets},
         {"approached", r.approached},
         {"worst_distance", r.worst_distance},
         {"containment_checked", r.containment_checked},
         {"containment_inside", r.containment_inside},
         {"worst_containment_margin", r.worst_containment_margin}};
    ctx.check("approach", r.approached == r.targets);
    ctx.check("containment", r.containment_inside == r.containment_checked);
    Table t;
    t.header = {"target", "first_length"};
    for (std::size_t i = 0; i < r.first_length.size(); ++i) {
      t.rows.push_back({std::to_string(i), std::to_string(r.first_length[i])});
    }
    write_table_output(ctx, "minimality", t, c.format);
  } else if (sub == "product") {
    const int max_length = c.max_length.value_or(10);
    const int min_length = c.min_length.value_or(6);
    const double eps = c.tol.value_or(0.1);
    ctx.config["product"] = {{"max_length", max_length}, {"min_length", min_length}, {"eps", eps}, {"pairs", x.pairs},
                             {"seed", spec.seed}};
    const ProductReport r =
        product_structure_check(require_table(table), max_length, eps, x.pairs, spec.seed, min_length, workers);
    m = {{"pairs", r.pairs}, {"successes", r.successes}, {"fraction", r.fraction}};
    Table t{{"pairs", "successes", "fraction"},
            {{std::to_string(r.pairs), std::to_string(r.successes), format_number(r.fraction)}}};
    write_table_output(ctx, "product", t, c.format);
  } else if (sub == "axdens") {
    const int max_length = c.max_length.value_or(8);
    const double eps = c.tol.value_or(0.1);
    ctx.config["axdens"] = {{"max_length", max_length}, {"eps", eps}};
    const AxialDensityReport r = axial_density_check(require_table(table), max_length, eps, workers, spec.tol);
    m = {{"samples", r.samples},
         {"axial_words", r.axial_words},
         {"worst_distance", r.worst_distance},
         {"within_eps", r.within_eps}};
    ctx.check("density", r.within_eps == 1.0);
    Table t{{"samples", "axial_words", "worst_distance", "within_eps"},
            {{std::to_string(r.samples), std::to_string(r.axial_words), format_number(r.worst_distance),
              format_number(r.within_eps)}}};
    write_table_output(ctx, "axdens", t, c.format);
  }
  ctx.report["metrics"] = m;
}

void add_common(CLI::App* app, Common& c, bool lengths) {
  app->add_option("--input", c.input, "group spec (JSON)")->required();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "overrides the spec seed");
  if (lengths) {
    app->add_option("--max-word-length", c.max_length);
    app->add_option("--min-word-length", c.min_length);
    app->add_option("--tol", c.tol, "epsilon of the limit set checks");
    app->add_option("--workers", c.workers, "0 for hardware parallelism; RANKR_THREADS overrides");
    app->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json", "svg"}));
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete groups on SL(n,R)/SO(n): decompositions, Schottky tables and limit sets", "rankr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string which, matrix_text, generator;
  Common dc;
  CLI::App* decompose = app.add_subcommand("decompose", "factor one matrix");
  decompose->add_option("--which", which)->required()->check(CLI::IsMember({"kak", "kan", "jordan", "bruhat"}));
  decompose->add_option("--matrix", matrix_text, "inline JSON matrix");
  decompose->add_option("--input", dc.input, "group spec (JSON)");
  decompose->add_option("--generator", generator, "generator name in the spec");
  decompose->add_option("--out", dc.out, "output directory");

  Common sc;
  std::optional<int> resolution;
  CLI::App* schottky = app.add_subcommand("schottky", "build or re-certify a ping-pong table");
  schottky->require_subcommand(1);
  CLI::App* build = schottky->add_subcommand("build", "build and certify a table from a recipe");
  add_common(build, sc, false);
  build->add_option("--resolution", resolution, "samples per neighborhood");
  CLI::App* check = schottky->add_subcommand("check", "re-certify a table file");
  add_common(check, sc, false);
  check->add_option("--resolution", resolution, "samples per neighborhood");

  Common lc;
  LimitsetExtra extra;
  CLI::App* limitset = app.add_subcommand("limitset", "limit set experiments");
  limitset->require_subcommand(1);
  std::vector<CLI::App*> subs;
  for (const char* name : {"enumerate", "cone", "minimality", "product", "axdens"}) {
    CLI::App* s = limitset->add_subcommand(name);
    add_common(s, lc, true);
    subs.push_back(s);
  }
  subs[1]->add_option("--p-lengths", extra.p_lengths, "lengths of the directional samples");
  subs[1]->add_option("--cone-length", extra.cone_length, "word length of the limit cone sample");
  subs[2]->add_option("--target-length", extra.target_length);
  subs[2]->add_option("--orbit-length", extra.orbit_length);
  subs[3]->add_option("--pairs", extra.pairs);

  std::vector<const char*> argv{"rankr"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kMalformed;
  }

  Context ctx;
  ctx.report["checks"] = json::array();
  std::string command;
  int code = kOk;
  try {
    if (*decompose) {
      command = "decompose";
      ctx.out_dir = dc.out;
      run_decompose(ctx, which, matrix_text, dc.input, generator);
    } else if (*schottky) {
      ctx.out_dir = sc.out;
      if (*build) {
        command = "schottky build";
        run_schottky_build(ctx, sc, resolution);
      } else {
        command = "schottky check";
        run_schottky_check(ctx, sc, resolution);
      }
    } else {
      ctx.out_dir = lc.out;
      for (CLI::App* s : subs) {
        if (*s) {
          command = "limitset " + s->get_name();
          run_limitset(ctx, s->get_name(), lc, extra);
        }
      }
    }
    if (ctx.report.contains("exit_override")) {
      code = ctx.report["exit_override"].get<int>();
      ctx.report.erase("exit_override");
    }
  } catch (const Error& e) {
    code = exit_code_for(e.code());
    ctx.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    err << "rankr: " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = kMalformed;
    ctx.report["error"] = {{"code", "Unexpected"}, {"message", e.what()}};
    err << "rankr: " << e.what() << "\n";
  }
  ctx.config["command"] = command;
  ctx.report["command"] = command;
  ctx.report["args"] = args;
  ctx.report["config_hash"] = hex64(config_hash(ctx.config));
  ctx.report["exit_code"] = code;
  ctx.report["status"] = code == kOk ? "ok" : "error";
  if (!ctx.out_dir.empty()) {
    try {
      fs::create_directories(ctx.out_dir);
      ctx.outputs.push_back((ctx.out_dir / "report.json").string());
      ctx.report["outputs"] = ctx.outputs;
      write_file(ctx.out_dir / "report.json", ctx.report.dump(1) + "\n");
    } catch (const std::exception& e) {
      err << "rankr: " << e.what() << "\n";
      if (code == kOk) code = kMalformed;
    }
  } else {
    ctx.report["outputs"] = json::array();
  }
  out << ctx.report.dump(1) << "\n";
  return code;
}

}  // namespace rankr::cli
