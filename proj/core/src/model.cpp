#include "poisson/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "builtin_models.hpp"

namespace poisson {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

// Split at commas outside parentheses.
std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      const std::string item = trim(s.substr(start, i - start));
      if (!item.empty()) out.push_back(item);
      start = i + 1;
    } else if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      --depth;
    }
  }
  return out;
}

struct Line {
  std::size_t number;
  std::size_t offset;  // of the value text
  std::size_t key_offset;
  std::string key;
  std::string value;
};

struct Section {
  std::string kind;
  std::string name;
  std::size_t number;
  std::size_t offset;
  std::vector<Line> lines;
};

class Loader {
 public:
  Loader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  Model load() {
    read_sections();
    Model m;
    m.source = source_;
    const Section* header = find("model");
    if (!header) fail(0, 0, "missing [model] section");
    for (const auto& l : header->lines) {
      if (l.key == "name")
        m.name = l.value;
      else if (l.key == "description")
        m.description = l.value;
      else if (l.key == "coordinates")
        m.chart = Chart::make(split_list(l.value));
      else if (l.key == "system")
        m.system = split_list(l.value);
      else
        fail(l.number, l.key_offset, "unknown key '" + l.key + "' in [model]");
    }
    if (!m.chart || m.chart->size() == 0) fail(header->number, header->offset, "[model] needs coordinates");
    for (std::size_t i = 0; i < m.chart->size(); ++i)
      if (std::count(m.chart->names().begin(), m.chart->names().end(), m.chart->name(i)) > 1)
        fail(header->number, header->offset, "duplicate coordinate '" + m.chart->name(i) + "'");
    m.pi = Bivector(m.chart);

    for (const auto& s : sections_) {
      if (s.kind == "model") continue;
      if (s.kind == "bivector")
        bivector(m, s);
      else if (s.kind == "functions")
        for (const auto& l : s.lines) m.functions.emplace_back(l.key, expr(l, l.value, m.chart));
      else if (s.kind == "points")
        for (const auto& l : s.lines) m.points.emplace_back(l.key, point(l, l.value, m));
      else if (s.kind == "two_form")
        two_form(m, s);
      else if (s.kind != "transversal" && s.kind != "group")
        fail(s.number, s.offset, "unknown section [" + s.kind + "]");
    }
    // transversals and groups may refer to points
    for (const auto& s : sections_) {
      if (s.kind == "transversal") transversal(m, s);
      if (s.kind == "group") group(m, s);
    }
    for (const auto& f : m.system) {
      try {
        (void)m.function(f);
      } catch (const Error& e) {
        fail(header->number, header->offset, std::string("system: ") + e.what());
      }
    }
    return m;
  }

 private:
  [[noreturn]] void fail(std::size_t line, std::size_t offset, const std::string& what) const {
    throw ParseError(source_ + ":" + std::to_string(line) + ": " + what, offset);
  }

  void read_sections() {
    std::size_t pos = 0, number = 0;
    while (pos <= text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos), text_.size());
      ++number;
      std::string_view raw = text_.substr(pos, end - pos);
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      const std::string line = trim(raw);
      const std::size_t lead = raw.find_first_not_of(" \t");
      const std::size_t line_offset = pos + (lead == std::string_view::npos ? 0 : lead);
      if (!line.empty()) {
        if (line.front() == '[') {
          if (line.back() != ']') fail(number, line_offset, "unterminated section header");
          const std::string inner = trim(std::string_view(line).substr(1, line.size() - 2));
          const auto sp = inner.find_first_of(" \t");
          Section s;
          s.kind = inner.substr(0, sp);
          s.name = sp == std::string::npos ? "" : trim(std::string_view(inner).substr(sp));
          s.number = number;
          s.offset = line_offset;
          if ((s.kind == "transversal" || s.kind == "group" || s.kind == "two_form") && s.name.empty())
            fail(number, line_offset, "[" + s.kind + "] needs a name");
          sections_.push_back(std::move(s));
        } else {
          if (sections_.empty()) fail(number, line_offset, "entry outside a section");
          const auto eq = raw.find('=');
          if (eq == std::string_view::npos) fail(number, line_offset, "expected 'key = value'");
          Line l;
          l.number = number;
          l.key_offset = line_offset;
          l.key = trim(raw.substr(0, eq));
          l.value = trim(raw.substr(eq + 1));
          const std::size_t vlead = raw.find_first_not_of(" \t", eq + 1);
          l.offset = pos + (vlead == std::string_view::npos ? eq + 1 : vlead);
          if (l.key.empty()) fail(number, line_offset, "empty key");
          sections_.back().lines.push_back(std::move(l));
        }
      }
      if (end == text_.size()) break;
      pos = end + 1;
    }
  }

  const Section* find(std::string_view kind) const {
    for (const auto& s : sections_)
      if (s.kind == kind) return &s;
    return nullptr;
  }

  Expr expr(const Line& l, const std::string& text, const ChartPtr& chart) const {
    try {
      return parse(text, chart);
    } catch (const ParseError& e) {
      throw ParseError(source_ + ":" + std::to_string(l.number) + ": " + e.what(), l.offset + e.position());
    } catch (const Error& e) {
      fail(l.number, l.offset, e.what());
    }
  }

  Point point(const Line& l, const std::string& text, const Model& m) const {
    try {
      return m.point(text);
    } catch (const Error& e) {
      fail(l.number, l.offset, e.what());
    }
  }

  std::pair<std::size_t, std::size_t> pair_key(const Line& l, const Model& m) const {
    const auto names = split_list(l.key);
    if (names.size() != 2) fail(l.number, l.key_offset, "expected 'a, b = expression'");
    const auto a = m.chart->find(names[0]), b = m.chart->find(names[1]);
    if (!a) fail(l.number, l.key_offset, "unknown coordinate '" + names[0] + "'");
    if (!b) fail(l.number, l.key_offset, "unknown coordinate '" + names[1] + "'");
    if (*a == *b) fail(l.number, l.key_offset, "diagonal entry");
    return {*a, *b};
  }

  void bivector(Model& m, const Section& s) const {
    for (const auto& l : s.lines) {
      const auto [a, b] = pair_key(l, m);
      m.pi.set(a, b, expr(l, l.value, m.chart));
    }
  }

  void two_form(Model& m, const Section& s) const {
    TwoForm b(m.chart);
    for (const auto& l : s.lines) {
      const auto [i, j] = pair_key(l, m);
      b.set(i, j, expr(l, l.value, m.chart));
    }
    m.two_forms.emplace_back(s.name, b);
  }

  void transversal(Model& m, const Section& s) const {
    std::vector<Expr> defining;
    std::optional<Point> base;
    for (const auto& l : s.lines) {
      if (l.key == "define")
        for (const auto& h : split_list(l.value)) defining.push_back(expr(l, h, m.chart));
      else if (l.key == "base")
        base = point(l, l.value, m);
      else
        fail(l.number, l.key_offset, "unknown key '" + l.key + "' in [transversal]");
    }
    if (defining.empty() || !base) fail(s.number, s.offset, "transversal needs 'define' and 'base'");
    try {
      m.transversals.emplace_back(s.name, defining, *base);
    } catch (const Error& e) {
      fail(s.number, s.offset, e.what());
    }
  }

  void group(Model& m, const Section& s) const {
    std::vector<std::string> elements;
    std::map<std::string, const Line*> rows, maps;
    for (const auto& l : s.lines) {
      if (l.key == "elements")
        elements = split_list(l.value);
      else if (l.key.rfind("product.", 0) == 0)
        rows[l.key.substr(8)] = &l;
      else if (l.key.rfind("map.", 0) == 0)
        maps[l.key.substr(4)] = &l;
      else
        fail(l.number, l.key_offset, "unknown key '" + l.key + "' in [group]");
    }
    if (elements.empty()) fail(s.number, s.offset, "group needs 'elements'");
    auto index = [&](const Line& l, const std::string& e) {
      const auto it = std::find(elements.begin(), elements.end(), e);
      if (it == elements.end()) fail(l.number, l.offset, "unknown element '" + e + "'");
      return static_cast<int>(it - elements.begin());
    };
    std::vector<std::vector<int>> table;
    std::vector<SymbolicMap> images;
    for (const auto& e : elements) {
      if (!rows.count(e)) fail(s.number, s.offset, "missing product." + e);
      if (!maps.count(e)) fail(s.number, s.offset, "missing map." + e);
      const Line& row = *rows[e];
      std::vector<int> t;
      for (const auto& x : split_list(row.value)) t.push_back(index(row, x));
      if (t.size() != elements.size()) fail(row.number, row.offset, "product row has the wrong length");
      table.push_back(t);
      const Line& ml = *maps[e];
      SymbolicMap map{m.chart, m.chart, {}};
      for (const auto& c : split_list(ml.value)) map.components.push_back(expr(ml, c, m.chart));
      if (map.components.size() != m.chart->size()) fail(ml.number, ml.offset, "map needs one image per coordinate");
      images.push_back(std::move(map));
    }
    try {
      m.groups.emplace_back(s.name, GroupAction::finite(m.chart, elements, table, images));
    } catch (const Error& e) {
      fail(s.number, s.offset, e.what());
    }
  }

  std::string_view text_;
  std::string source_;
  std::vector<Section> sections_;
};

template <class T>
const T& lookup(const std::vector<std::pair<std::string, T>>& items, std::string_view name, const char* what) {
  for (const auto& [n, v] : items)
    if (n == name) return v;
  throw Error(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

}  // namespace

Expr Model::function(std::string_view name_or_expression) const {
  for (const auto& [n, f] : functions)
    if (n == name_or_expression) return f;
  return parse(name_or_expression, chart);
}

FunctionFamily Model::family(const std::vector<std::string>& names_or_expressions) const {
  std::vector<Expr> fs;
  for (const auto& n : names_or_expressions) fs.push_back(function(n));
  return FunctionFamily(chart, fs, names_or_expressions);
}

Point Model::point(std::string_view name_or_values) const {
  for (const auto& [n, p] : points)
    if (n == name_or_values) return p;
  const auto parts = split_list(name_or_values);
  if (parts.size() != chart->size())
    throw Error("point '" + std::string(name_or_values) + "' is neither a named point nor " +
                std::to_string(chart->size()) + " coordinates");
  std::vector<double> v;
  for (const auto& s : parts) {
    const Expr e = parse(s, chart);
    if (!e.is_constant()) throw Error("point coordinate '" + s + "' is not a constant");
    v.push_back(e.constant_value().get_d());
  }
  return Point(chart, v);
}

const Transversal& Model::transversal(std::string_view name) const {
  for (const auto& t : transversals)
    if (t.name() == name) return t;
  throw Error("unknown transversal '" + std::string(name) + "'");
}

const GroupAction& Model::group(std::string_view name) const { return lookup(groups, name, "group"); }

const TwoForm& Model::two_form(std::string_view name) const { return lookup(two_forms, name, "two-form"); }

Model parse_model(std::string_view text, std::string source) { return Loader(text, std::move(source)).load(); }

Model load_model(const std::string& path) {
  if (path.rfind("builtin:", 0) == 0) return parse_model(builtin_model_text(path.substr(8)), path);
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

std::vector<std::string> builtin_models() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::kBuiltinModels) out.emplace_back(name);
  return out;
}

std::string_view builtin_model_text(std::string_view name) {
  for (const auto& [n, text] : detail::kBuiltinModels)
    if (n == name) return text;
  throw Error("unknown builtin model '" + std::string(name) + "'");
}

}  // namespace poisson
