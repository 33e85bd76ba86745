#include "smtilp/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace smtilp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, size_t line) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error("line " + std::to_string(line) + ": bad real '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

GroundAtom parse_ground_atom(std::string_view text) {
  text = trim(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')' || open == 0)
    throw Error("malformed atom '" + std::string(text) + "'");
  GroundAtom a;
  a.predicate = std::string(trim(text.substr(0, open)));
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  while (!inner.empty()) {
    auto comma = inner.find(',');
    auto tok = trim(inner.substr(0, comma));
    if (tok.empty()) throw Error("empty argument in atom '" + std::string(text) + "'");
    a.objects.emplace_back(tok);
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return a;
}

Dataset parse_dataset(std::string_view text) {
  Dataset d;
  std::istringstream in{std::string(text)};
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto sp = line.find_first_of(" \t");
    std::string_view kw = line.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
    if (kw == "fact") {
      d.background.add_fact(parse_ground_atom(rest));
    } else if (kw == "measure") {
      std::istringstream ls{std::string(rest)};
      std::string obj, attr, val, extra;
      if (!(ls >> obj >> attr >> val) || (ls >> extra))
        throw Error("line " + std::to_string(lineno) + ": expected 'measure <obj> <attr> <real>'");
      d.background.add_measurement(obj, attr, parse_real(val, lineno));
    } else if (kw == "example") {
      std::istringstream ls{std::string(rest)};
      std::string id, pol;
      if (!(ls >> id >> pol)) throw Error("line " + std::to_string(lineno) + ": malformed example");
      std::string atom_text;
      std::getline(ls, atom_text);
      Example e;
      e.id = id;
      if (pol == "pos")
        e.polarity = Polarity::Positive;
      else if (pol == "neg")
        e.polarity = Polarity::Negative;
      else
        throw Error("line " + std::to_string(lineno) + ": polarity must be pos or neg");
      e.head = parse_ground_atom(atom_text);
      d.background.declare_predicate(e.head->predicate, static_cast<int>(e.head->objects.size()));
      (e.positive() ? d.positives : d.negatives).push_back(std::move(e));
    } else {
      throw Error("line " + std::to_string(lineno) + ": unknown record '" + std::string(kw) + "'");
    }
  }
  d.validate();
  return d;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open dataset " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_dataset(ss.str());
}

std::string serialize_dataset(const Dataset& d) {
  std::ostringstream os;
  for (const auto& f : d.background.facts()) os << "fact " << f.to_string() << '\n';
  for (const auto& m : d.background.measurements())
    os << "measure " << m.object << ' ' << m.attribute << ' ' << format_real(m.value) << '\n';
  auto emit = [&](const std::vector<Example>& xs) {
    for (const auto& e : xs) {
      if (!e.head) throw Error("example " + e.id + " has no head atom");
      os << "example " << e.id << ' ' << (e.positive() ? "pos" : "neg") << ' ' << e.head->to_string() << '\n';
    }
  };
  emit(d.positives);
  emit(d.negatives);
  return os.str();
}

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write dataset " + path);
  f << serialize_dataset(d);
}

}  // namespace smtilp
