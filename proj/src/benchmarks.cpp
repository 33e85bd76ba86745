#include "smtilp/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "smtilp/dataset_io.hpp"

namespace smtilp {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Geometry0: return "geometry0";
    case Family::Geometry1: return "geometry1";
    case Family::Geometry2: return "geometry2";
    case Family::Geometry3: return "geometry3";
    case Family::Ip: return "ip";
  }
  return "ip";
}

std::optional<Family> parse_family(std::string_view s) {
  for (Family f : {Family::Geometry0, Family::Geometry1, Family::Geometry2, Family::Geometry3, Family::Ip})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kMaxDraws = 1000000;

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  // Fixed bit recipe so datasets do not depend on the library's distributions.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  size_t index(size_t n) { return static_cast<size_t>(uniform() * double(n)) % n; }

 private:
  std::mt19937_64 eng_;
};

// Attribute access by head position.
using Get = std::function<double(int, const char*)>;

enum class ObjType { Point, Point3, Region, Segment };

std::vector<const char*> type_attrs(ObjType t) {
  switch (t) {
    case ObjType::Point: return {"x", "y"};
    case ObjType::Point3: return {"x", "y", "z"};
    case ObjType::Region: return {"xmin", "xmax", "ymin", "ymax"};
    case ObjType::Segment: return {"xmin", "xmax"};
  }
  return {};
}

using Values = std::vector<std::map<std::string, double>>;  // per head position

struct GeoTask {
  TaskInfo info;
  std::vector<ObjType> types;
  std::function<bool(const Get&)> label;
  std::function<double(const Get&)> boundary;
  // Optional proposal used for half of the draws; fills `v` in place.
  std::function<void(Rng&, Values&)> proposal;
};

double sq(double v) { return v * v; }
double hypot2(double x, double y) { return std::sqrt(x * x + y * y); }

double cross3(const Get& g) {
  return (g(0, "x") - g(1, "x")) * (g(2, "y") - g(1, "y")) - (g(0, "y") - g(1, "y")) * (g(2, "x") - g(1, "x"));
}
double dot3(const Get& g) {
  return (g(0, "x") - g(1, "x")) * (g(2, "x") - g(0, "x")) + (g(0, "y") - g(1, "y")) * (g(2, "y") - g(0, "y"));
}
double dist01(const Get& g) { return hypot2(g(0, "x") - g(1, "x"), g(0, "y") - g(1, "y")); }

double box_margin(double x, double y, double x0, double x1, double y0, double y1) {
  return std::min({x - x0, x1 - x, y - y0, y1 - y});
}

void sample_uniform(Rng& rng, const std::vector<ObjType>& types, Values& v) {
  v.assign(types.size(), {});
  for (size_t i = 0; i < types.size(); ++i) {
    switch (types[i]) {
      case ObjType::Point:
        v[i]["x"] = rng.uniform(-10, 10);
        v[i]["y"] = rng.uniform(-10, 10);
        break;
      case ObjType::Point3:
        v[i]["x"] = rng.uniform(-10, 10);
        v[i]["y"] = rng.uniform(-10, 10);
        v[i]["z"] = rng.uniform(-10, 10);
        break;
      case ObjType::Region: {
        double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
        double c = rng.uniform(-10, 10), d = rng.uniform(-10, 10);
        v[i]["xmin"] = std::min(a, b);
        v[i]["xmax"] = std::max(a, b);
        v[i]["ymin"] = std::min(c, d);
        v[i]["ymax"] = std::max(c, d);
        break;
      }
      case ObjType::Segment: {
        double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
        v[i]["xmin"] = std::min(a, b);
        v[i]["xmax"] = std::max(a, b);
        break;
      }
    }
  }
}

// P = A + t (B - A) + offset giving cross product `c`.
void place_on_line(Rng& rng, Values& v) {
  double ax = v[1]["x"], ay = v[1]["y"], dx = v[2]["x"] - ax, dy = v[2]["y"] - ay;
  double n2 = dx * dx + dy * dy;
  if (n2 < 1e-6) return;
  double t = rng.uniform(-0.5, 1.5), c = rng.uniform(-1.5, 1.5);
  double s = -c / n2;
  v[0]["x"] = std::clamp(ax + t * dx - s * dy, -10.0, 10.0);
  v[0]["y"] = std::clamp(ay + t * dy + s * dx, -10.0, 10.0);
}

void place_near(Rng& rng, Values& v, int who, int anchor, double radius) {
  double r = rng.uniform(0, radius), a = rng.uniform(0, 2 * M_PI);
  v[who]["x"] = std::clamp(v[anchor]["x"] + r * std::cos(a), -10.0, 10.0);
  v[who]["y"] = std::clamp(v[anchor]["y"] + r * std::sin(a), -10.0, 10.0);
}

std::vector<GeoTask> build_geo_tasks() {
  std::vector<GeoTask> out;
  auto add = [&](std::string name, Family fam, std::string head, std::vector<ObjType> types, std::string formula,
                 std::map<std::string, double> params, std::function<bool(const Get&)> label,
                 std::function<double(const Get&)> boundary, std::function<void(Rng&, Values&)> proposal = {}) {
    GeoTask t;
    t.info = {std::move(name), fam, std::move(head), static_cast<int>(types.size()), std::move(formula),
              std::move(params)};
    t.types = std::move(types);
    t.label = std::move(label);
    t.boundary = std::move(boundary);
    t.proposal = std::move(proposal);
    out.push_back(std::move(t));
  };
  using enum ObjType;
  const auto G0 = Family::Geometry0, G1 = Family::Geometry1, G2 = Family::Geometry2, G3 = Family::Geometry3;

  // geometry0
  add("interval", G0, "target", {Point}, "-3 < x(P) < 4", {{"l", -3}, {"u", 4}},
      [](const Get& g) { return -3 < g(0, "x") && g(0, "x") < 4; },
      [](const Get& g) { return std::min(g(0, "x") + 3, 4 - g(0, "x")); });
  add("halfplane", G0, "target", {Point}, "x(P) + 2*y(P) <= 3", {{"a", 1}, {"b", 2}, {"theta", 3}},
      [](const Get& g) { return g(0, "x") + 2 * g(0, "y") <= 3; },
      [](const Get& g) { return (3 - g(0, "x") - 2 * g(0, "y")) / std::sqrt(5.0); });

  // geometry1
  add("halfplane3d", G1, "target", {Point3}, "x + 2y - z <= 2", {{"a", 1}, {"b", 2}, {"c", -1}, {"d", 2}},
      [](const Get& g) { return g(0, "x") + 2 * g(0, "y") - g(0, "z") <= 2; },
      [](const Get& g) { return (2 - g(0, "x") - 2 * g(0, "y") + g(0, "z")) / std::sqrt(6.0); });
  add("conjunction", G1, "target", {Point3}, "x + y + z <= 3 and -4 < z < 5",
      {{"a", 1}, {"b", 1}, {"c", 1}, {"d", 3}, {"l", -4}, {"u", 5}},
      [](const Get& g) {
        return g(0, "x") + g(0, "y") + g(0, "z") <= 3 && -4 < g(0, "z") && g(0, "z") < 5;
      },
      [](const Get& g) {
        return std::min({(3 - g(0, "x") - g(0, "y") - g(0, "z")) / std::sqrt(3.0), g(0, "z") + 4, 5 - g(0, "z")});
      });
  add("interval3d", G1, "target", {Point3}, "-5 < x < 5 and -4 < y < 6 and -6 < z < 3",
      {{"xl", -5}, {"xu", 5}, {"yl", -4}, {"yu", 6}, {"zl", -6}, {"zu", 3}},
      [](const Get& g) {
        double x = g(0, "x"), y = g(0, "y"), z = g(0, "z");
        return -5 < x && x < 5 && -4 < y && y < 6 && -6 < z && z < 3;
      },
      [](const Get& g) {
        double x = g(0, "x"), y = g(0, "y"), z = g(0, "z");
        return std::min({x + 5, 5 - x, y + 4, 6 - y, z + 6, 3 - z});
      });
  add("multiple_halfplanes", G1, "target", {Point3}, "x + y + z <= 4 and x - y <= 3",
      {{"a1", 1}, {"b1", 1}, {"c1", 1}, {"d1", 4}, {"a2", 1}, {"b2", -1}, {"c2", 0}, {"d2", 3}},
      [](const Get& g) {
        return g(0, "x") + g(0, "y") + g(0, "z") <= 4 && g(0, "x") - g(0, "y") <= 3;
      },
      [](const Get& g) {
        return std::min((4 - g(0, "x") - g(0, "y") - g(0, "z")) / std::sqrt(3.0),
                        (3 - g(0, "x") + g(0, "y")) / std::sqrt(2.0));
      });

  // geometry2
  add("left_of", G2, "left_of", {Point, Point}, "x(P) < x(Q)", {},
      [](const Get& g) { return g(0, "x") < g(1, "x"); }, [](const Get& g) { return g(1, "x") - g(0, "x"); });
  add("closer_than", G2, "closer_than", {Point, Point}, "dist(P,Q) <= 5", {{"d", 5}},
      [](const Get& g) { return sq(g(0, "x") - g(1, "x")) + sq(g(0, "y") - g(1, "y")) <= 25; },
      [](const Get& g) { return 5 - dist01(g); }, [](Rng& r, Values& v) { place_near(r, v, 1, 0, 8); });
  add("touching", G2, "touching", {Segment, Segment}, "xmin(S) <= xmax(T) and xmin(T) <= xmax(S)", {},
      [](const Get& g) { return g(0, "xmin") <= g(1, "xmax") && g(1, "xmin") <= g(0, "xmax"); },
      [](const Get& g) { return std::min(g(1, "xmax") - g(0, "xmin"), g(0, "xmax") - g(1, "xmin")); });
  add("inside", G2, "inside", {Point, Region}, "xmin(R) <= x(P) <= xmax(R) and ymin(R) <= y(P) <= ymax(R)", {},
      [](const Get& g) {
        return g(1, "xmin") <= g(0, "x") && g(0, "x") <= g(1, "xmax") && g(1, "ymin") <= g(0, "y") &&
               g(0, "y") <= g(1, "ymax");
      },
      [](const Get& g) {
        return box_margin(g(0, "x"), g(0, "y"), g(1, "xmin"), g(1, "xmax"), g(1, "ymin"), g(1, "ymax"));
      },
      [](Rng& r, Values& v) {
        v[0]["x"] = r.uniform(v[1]["xmin"], v[1]["xmax"]);
        v[0]["y"] = r.uniform(v[1]["ymin"], v[1]["ymax"]);
      });
  add("overlapping", G2, "overlapping", {Region, Region}, "boxes R and S intersect", {},
      [](const Get& g) {
        return g(0, "xmin") <= g(1, "xmax") && g(1, "xmin") <= g(0, "xmax") && g(0, "ymin") <= g(1, "ymax") &&
               g(1, "ymin") <= g(0, "ymax");
      },
      [](const Get& g) {
        return std::min({g(1, "xmax") - g(0, "xmin"), g(0, "xmax") - g(1, "xmin"), g(1, "ymax") - g(0, "ymin"),
                         g(0, "ymax") - g(1, "ymin")});
      });
  add("between", G2, "between", {Point, Point, Point}, "|cross(P,A,B)| <= 0.4 and dot(P,A,B) >= 0",
      {{"eps", 0.4}},
      [](const Get& g) { return std::fabs(cross3(g)) <= 0.4 && dot3(g) >= 0; },
      [](const Get& g) {
        double ab = hypot2(g(2, "x") - g(1, "x"), g(2, "y") - g(1, "y"));
        return std::min(0.4 - std::fabs(cross3(g)), dot3(g) / std::max(ab, 1e-9));
      },
      place_on_line);
  add("adjacent", G2, "adjacent", {Point, Point}, "dist(P,Q) <= 3 and x(P) < x(Q)", {{"d", 3}},
      [](const Get& g) {
        return sq(g(0, "x") - g(1, "x")) + sq(g(0, "y") - g(1, "y")) <= 9 && g(0, "x") < g(1, "x");
      },
      [](const Get& g) { return std::min(3 - dist01(g), g(1, "x") - g(0, "x")); },
      [](Rng& r, Values& v) { place_near(r, v, 1, 0, 5); });
  add("aligned", G2, "aligned", {Point, Point, Point}, "|cross(P,A,B)| <= 0.4", {{"eps", 0.4}},
      [](const Get& g) { return std::fabs(cross3(g)) <= 0.4; },
      [](const Get& g) { return 0.4 - std::fabs(cross3(g)); }, place_on_line);
  add("surrounds", G2, "surrounds", {Region, Region}, "box R contains box S", {},
      [](const Get& g) {
        return g(0, "xmin") <= g(1, "xmin") && g(1, "xmax") <= g(0, "xmax") && g(0, "ymin") <= g(1, "ymin") &&
               g(1, "ymax") <= g(0, "ymax");
      },
      [](const Get& g) {
        return std::min({g(1, "xmin") - g(0, "xmin"), g(0, "xmax") - g(1, "xmax"), g(1, "ymin") - g(0, "ymin"),
                         g(0, "ymax") - g(1, "ymax")});
      },
      [](Rng& r, Values& v) {
        auto inner = [&](const char* lo, const char* hi) {
          double a = r.uniform(v[0][lo], v[0][hi]), b = r.uniform(v[0][lo], v[0][hi]);
          v[1][lo] = std::min(a, b);
          v[1][hi] = std::max(a, b);
        };
        inner("xmin", "xmax");
        inner("ymin", "ymax");
      });
  add("near_corner", G2, "near_corner", {Point, Point}, "dist(P,C) <= 2", {{"d", 2}},
      [](const Get& g) { return sq(g(0, "x") - g(1, "x")) + sq(g(0, "y") - g(1, "y")) <= 4; },
      [](const Get& g) { return 2 - dist01(g); }, [](Rng& r, Values& v) { place_near(r, v, 0, 1, 4); });

  // geometry3
  auto X = [](const Get& g) { return g(0, "x"); };
  auto Y = [](const Get& g) { return g(0, "y"); };
  auto R = [](const Get& g) { return hypot2(g(0, "x"), g(0, "y")); };
  add("in_circle", G3, "target", {Point}, "x^2 + y^2 <= 25", {{"r", 5}},
      [=](const Get& g) { return sq(X(g)) + sq(Y(g)) <= 25; }, [=](const Get& g) { return 5 - R(g); });
  add("in_ellipse", G3, "target", {Point}, "x^2/49 + y^2/16 <= 1", {{"a", 7}, {"b", 4}},
      [=](const Get& g) { return sq(X(g)) / 49 + sq(Y(g)) / 16 <= 1; },
      [=](const Get& g) { return 4 * (1 - std::sqrt(sq(X(g)) / 49 + sq(Y(g)) / 16)); });
  add("hyperbola_side", G3, "target", {Point}, "x^2 - y^2 <= 4", {{"c", 4}},
      [=](const Get& g) { return sq(X(g)) - sq(Y(g)) <= 4; },
      [=](const Get& g) { return (4 - sq(X(g)) + sq(Y(g))) / std::max(2 * R(g), 1e-9); });
  add("xy_less_than", G3, "target", {Point}, "x*y < 6", {{"c", 6}}, [=](const Get& g) { return X(g) * Y(g) < 6; },
      [=](const Get& g) { return (6 - X(g) * Y(g)) / std::max(R(g), 1e-9); });
  add("quad_strip", G3, "target", {Point}, "-2 <= y - 0.1x^2 <= 2", {{"a", 0.1}, {"l", -2}, {"u", 2}},
      [=](const Get& g) {
        double s = Y(g) - 0.1 * sq(X(g));
        return -2 <= s && s <= 2;
      },
      [=](const Get& g) {
        double s = Y(g) - 0.1 * sq(X(g));
        return std::min(s + 2, 2 - s) / std::sqrt(1 + sq(0.2 * X(g)));
      });
  add("union_halfplanes", G3, "target", {Point}, "x + y <= -4 or x - y >= 5", {},
      [=](const Get& g) { return X(g) + Y(g) <= -4 || X(g) - Y(g) >= 5; },
      [=](const Get& g) {
        return std::max((-4 - X(g) - Y(g)) / std::sqrt(2.0), (X(g) - Y(g) - 5) / std::sqrt(2.0));
      });
  add("circle_or_box", G3, "target", {Point}, "x^2 + y^2 <= 16 or (|x| <= 3.2 and |y| <= 3.2)",
      {{"r", 4}, {"s", 3.2}},
      [=](const Get& g) {
        return sq(X(g)) + sq(Y(g)) <= 16 || (std::fabs(X(g)) <= 3.2 && std::fabs(Y(g)) <= 3.2);
      },
      [=](const Get& g) { return std::max(4 - R(g), 3.2 - std::max(std::fabs(X(g)), std::fabs(Y(g)))); });
  add("piecewise", G3, "target", {Point}, "(x < 0 and y <= 3) or (x >= 0 and x + y <= 3)", {},
      [=](const Get& g) { return (X(g) < 0 && Y(g) <= 3) || (X(g) >= 0 && X(g) + Y(g) <= 3); },
      [=](const Get& g) {
        double x = X(g);
        return (3 - std::max(0.0, x) - Y(g)) / (x > 0 ? std::sqrt(2.0) : 1.0);
      });
  add("fallback_region", G3, "target", {Point}, "x^2 + y^2 <= 9 or x > 5", {{"r", 3}, {"l", 5}},
      [=](const Get& g) { return sq(X(g)) + sq(Y(g)) <= 9 || X(g) > 5; },
      [=](const Get& g) { return std::max(3 - R(g), X(g) - 5); });
  add("donut", G3, "target", {Point}, "9 <= x^2 + y^2 <= 36", {{"rmin", 3}, {"rmax", 6}},
      [=](const Get& g) {
        double r2 = sq(X(g)) + sq(Y(g));
        return 9 <= r2 && r2 <= 36;
      },
      [=](const Get& g) { return std::min(R(g) - 3, 6 - R(g)); });
  add("lshape", G3, "target", {Point}, "[-6,0]x[-6,6] union [-6,6]x[-6,-2]", {},
      [=](const Get& g) {
        double x = X(g), y = Y(g);
        return (-6 <= x && x <= 0 && -6 <= y && y <= 6) || (-6 <= x && x <= 6 && -6 <= y && y <= -2);
      },
      [=](const Get& g) {
        double x = X(g), y = Y(g);
        return std::max(box_margin(x, y, -6, 0, -6, 6), box_margin(x, y, -6, 6, -6, -2));
      });
  add("above_parabola", G3, "target", {Point}, "y >= 0.2x^2 - 4", {{"a", 0.2}, {"b", 0}, {"c", -4}},
      [=](const Get& g) { return Y(g) >= 0.2 * sq(X(g)) - 4; },
      [=](const Get& g) { return (Y(g) - 0.2 * sq(X(g)) + 4) / std::sqrt(1 + sq(0.4 * X(g))); });
  add("sinusoidal", G3, "target", {Point}, "y >= sin(x) + 0.5", {{"omega", 1}, {"phi", 0.5}},
      [=](const Get& g) { return Y(g) >= std::sin(X(g)) + 0.5; },
      [=](const Get& g) { return (Y(g) - std::sin(X(g)) - 0.5) / std::sqrt(1 + sq(std::cos(X(g)))); });
  add("crescent", G3, "target", {Point}, "x^2 + y^2 <= 36 and y >= 0.15x^2 - 2", {{"r", 6}, {"a", 0.15}, {"c", -2}},
      [=](const Get& g) { return sq(X(g)) + sq(Y(g)) <= 36 && Y(g) >= 0.15 * sq(X(g)) - 2; },
      [=](const Get& g) {
        return std::min(6 - R(g), (Y(g) - 0.15 * sq(X(g)) + 2) / std::sqrt(1 + sq(0.3 * X(g))));
      });
  return out;
}

const std::vector<GeoTask>& geo_tasks() {
  static const std::vector<GeoTask> tasks = build_geo_tasks();
  return tasks;
}

const GeoTask* find_geo(std::string_view name) {
  for (const auto& t : geo_tasks())
    if (t.info.name == name) return &t;
  return nullptr;
}

}  // namespace

namespace {

// ---- influence propagation graphs ----

constexpr double kEdgeProb = 0.1;
constexpr int kGraphNodes = 60;
constexpr double kInfluenceTau = 2.5;
constexpr double kScoreTau = 60.0;
constexpr double kScoreUnit = 10.0;  // score range is ten times the influence range

struct IpGraph {
  std::vector<std::string> names;
  std::vector<std::vector<int>> out, in;
  std::vector<double> score, max_influence;
  std::vector<bool> seed;
};

IpGraph random_graph(Rng& rng, int index) {
  IpGraph g;
  const int n = kGraphNodes;
  g.out.resize(n);
  g.in.resize(n);
  g.max_influence.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    g.names.push_back("g" + std::to_string(index) + "n" + std::to_string(i));
    g.score.push_back(rng.uniform(0, 100));
    g.seed.push_back(rng.bernoulli(0.15));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!rng.bernoulli(kEdgeProb)) continue;
      bool forward = rng.bernoulli(0.5);
      int a = forward ? i : j, b = forward ? j : i;
      double u = rng.uniform();
      double w = 10 * u * u;
      g.out[a].push_back(b);
      g.in[b].push_back(a);
      g.max_influence[b] = std::max(g.max_influence[b], w);
    }
  return g;
}

// Graph access shared by generation and labelling.
struct GraphView {
  std::function<std::vector<std::string>(const std::string&)> out, in;
  std::function<bool(const std::string&)> seed;
  std::function<double(const std::string&, const char*)> attr;
};

GraphView view_of(const IpGraph& g, const std::map<std::string, int>& idx) {
  auto names = [&g](const std::vector<int>& v) {
    std::vector<std::string> r;
    for (int k : v) r.push_back(g.names[k]);
    return r;
  };
  GraphView v;
  v.out = [&g, &idx, names](const std::string& a) { return names(g.out[idx.at(a)]); };
  v.in = [&g, &idx, names](const std::string& a) { return names(g.in[idx.at(a)]); };
  v.seed = [&g, &idx](const std::string& a) { return bool(g.seed[idx.at(a)]); };
  v.attr = [&g, &idx](const std::string& a, const char* at) {
    int k = idx.at(a);
    return std::string_view(at) == "score" ? g.score[k] : g.max_influence[k];
  };
  return v;
}

GraphView view_of(const Background& bg) {
  auto follow = [&bg](const std::string& a, int from) {
    std::vector<std::string> r;
    for (size_t i : bg.lookup("propagates", from, a)) r.push_back(bg.facts()[i].objects[1 - from]);
    return r;
  };
  GraphView v;
  v.out = [follow](const std::string& a) { return follow(a, 0); };
  v.in = [follow](const std::string& a) { return follow(a, 1); };
  v.seed = [&bg](const std::string& a) {
    return bg.knows_predicate("seed") && !bg.lookup("seed", 0, a).empty();
  };
  v.attr = [&bg](const std::string& a, const char* at) {
    auto m = bg.measurement(a, at);
    if (!m) throw Error("missing measurement " + std::string(at) + "(" + a + ")");
    return *m;
  };
  return v;
}

// C such that A -> B -> C -> A for some B.
std::vector<std::string> triangle_closers(const GraphView& g, const std::string& a) {
  std::set<std::string> in_a;
  for (const auto& c : g.in(a)) in_a.insert(c);
  std::set<std::string> out;
  for (const auto& b : g.out(a))
    for (const auto& c : g.out(b))
      if (c != a && in_a.count(c)) out.insert(c);
  return {out.begin(), out.end()};
}

bool ip_label(std::string_view task, const GraphView& g, const std::string& a) {
  if (task == "ip1_active") {
    for (const auto& b : g.in(a))
      if (g.seed(b)) return true;
    return false;
  }
  if (task == "ip2_active") {
    for (const auto& b : g.out(a))
      for (const auto& c : g.out(b))
        if (g.seed(c)) return true;
    return false;
  }
  auto closers = triangle_closers(g, a);
  if (task == "ip3_active") return !closers.empty();
  for (const auto& c : closers) {
    if (task == "ip3_threshold" && g.attr(c, "max_influence") > kInfluenceTau) return true;
    if (task == "ip4_high_score" && g.attr(c, "score") > kScoreTau) return true;
  }
  return false;
}

double ip_boundary(std::string_view task, const GraphView& g, const std::string& a) {
  if (task == "ip3_threshold" || task == "ip4_high_score") {
    auto closers = triangle_closers(g, a);
    if (closers.empty()) return -kInf;
    double best = -kInf;
    for (const auto& c : closers) {
      double v = task == "ip3_threshold" ? g.attr(c, "max_influence") - kInfluenceTau
                                         : (g.attr(c, "score") - kScoreTau) / kScoreUnit;
      best = std::max(best, v);
    }
    return best;
  }
  return ip_label(task, g, a) ? kInf : -kInf;
}

// Sampling cell for a node, or -1 to reject. Cells stratify negatives (and
// for ip2 positives) on the shallow features a one-hop rule could use.
int ip_cell(std::string_view task, const GraphView& g, const std::string& a, bool label) {
  if (task == "ip1_active") return label ? 0 : 1;
  if (task == "ip2_active") {
    bool one_hop = false;
    for (const auto& b : g.out(a)) one_hop = one_hop || g.seed(b);
    return (label ? 0 : 2) + (one_hop ? 1 : 0);
  }
  if (label) return 0;
  if (g.in(a).empty() || g.out(a).empty()) return -1;
  if (task == "ip3_active") return 1;
  const char* attr = task == "ip3_threshold" ? "max_influence" : "score";
  double tau = task == "ip3_threshold" ? kInfluenceTau : kScoreTau;
  bool high_in = false;
  for (const auto& d : g.in(a)) high_in = high_in || g.attr(d, attr) > tau;
  if (!high_in) return -1;
  return triangle_closers(g, a).empty() ? 2 : 1;
}

std::vector<int> ip_quotas(std::string_view task, int n) {
  int pos = n / 2, neg = n - pos;
  if (task == "ip1_active" || task == "ip3_active") return {pos, neg};
  if (task == "ip2_active") return {pos / 2, pos - pos / 2, neg / 2, neg - neg / 2};
  return {pos, neg / 2, neg - neg / 2};
}

bool is_ip(std::string_view task) { return task.rfind("ip", 0) == 0; }

const std::vector<TaskInfo>& ip_infos() {
  static const std::vector<TaskInfo> v = {
      {"ip1_active", Family::Ip, "active", 1, "propagates(B,A) and seed(B)", {}},
      {"ip2_active", Family::Ip, "active", 1, "propagates(A,B), propagates(B,C), seed(C)", {}},
      {"ip3_active", Family::Ip, "active", 1, "A -> B -> C -> A", {}},
      {"ip3_threshold", Family::Ip, "active", 1, "A -> B -> C -> A and max_influence(C) > 2.5",
       {{"tau", kInfluenceTau}}},
      {"ip4_high_score", Family::Ip, "active", 1, "A -> B -> C -> A and score(C) > 60", {{"tau", kScoreTau}}},
  };
  return v;
}

uint64_t mix_seed(uint64_t seed, std::string_view name) {
  uint64_t h = 1469598103934665603ull;
  for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
  return h ^ (seed * 0x9E3779B97F4A7C15ull);
}

Example make_example(size_t i, bool label, std::string head, std::vector<std::string> objs) {
  Example e;
  e.id = "e" + std::to_string(i);
  e.polarity = label ? Polarity::Positive : Polarity::Negative;
  e.head = GroundAtom{std::move(head), std::move(objs)};
  return e;
}

void add_example(Dataset& d, Example e) {
  (e.positive() ? d.positives : d.negatives).push_back(std::move(e));
}

std::vector<Example> generate_geo(const GeoTask& t, int n, double margin, Rng& rng, Background& bg) {
  const int quota[2] = {n - n / 2, n / 2};  // neg, pos
  int have[2] = {0, 0};
  std::vector<Example> out;
  Values v;
  long draws = 0;
  while (have[0] < quota[0] || have[1] < quota[1]) {
    if (++draws > kMaxDraws) throw Error("rejection sampling for " + t.info.name + " exceeded 10^6 draws");
    sample_uniform(rng, t.types, v);
    if (t.proposal && rng.bernoulli(0.5)) t.proposal(rng, v);
    Get get = [&v](int pos, const char* attr) { return v[pos].at(attr); };
    bool label = t.label(get);
    if (have[label] >= quota[label]) continue;
    if (std::fabs(t.boundary(get)) < margin) continue;
    ++have[label];
    size_t i = out.size();
    std::vector<std::string> objs;
    for (size_t k = 0; k < t.types.size(); ++k) {
      std::string name = "o" + std::to_string(i) + (t.types.size() > 1 ? "_" + std::to_string(k) : "");
      for (const char* attr : type_attrs(t.types[k])) bg.add_measurement(name, attr, v[k].at(attr));
      objs.push_back(name);
    }
    out.push_back(make_example(i, label, t.info.head, std::move(objs)));
  }
  return out;
}

std::vector<Example> generate_ip(std::string_view task, int n, double margin, Rng& rng, Background& bg) {
  std::vector<int> quota = ip_quotas(task, n), have(quota.size(), 0);
  auto full = [&] {
    for (size_t i = 0; i < quota.size(); ++i)
      if (have[i] < quota[i]) return false;
    return true;
  };
  const bool with_seed = task == "ip1_active" || task == "ip2_active";
  bg.declare_predicate("propagates", 2);
  if (with_seed) bg.declare_predicate("seed", 1);
  std::vector<Example> out;
  long draws = 0;
  for (int gi = 0; !full(); ++gi) {
    IpGraph g = random_graph(rng, gi);
    std::map<std::string, int> idx;
    for (int i = 0; i < kGraphNodes; ++i) idx[g.names[i]] = i;
    GraphView view = view_of(g, idx);
    std::vector<int> order(kGraphNodes);
    std::iota(order.begin(), order.end(), 0);
    for (int i = kGraphNodes - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    bool used = false;
    for (int k : order) {
      if (full()) break;
      if (++draws > kMaxDraws) throw Error("rejection sampling for " + std::string(task) + " exceeded 10^6 draws");
      const std::string& a = g.names[k];
      bool label = ip_label(task, view, a);
      int cell = ip_cell(task, view, a, label);
      if (cell < 0 || have[cell] >= quota[cell]) continue;
      if (std::fabs(ip_boundary(task, view, a)) < margin) continue;
      ++have[cell];
      used = true;
      out.push_back(make_example(out.size(), label, "active", {a}));
    }
    if (!used) continue;
    for (int i = 0; i < kGraphNodes; ++i) {
      for (int j : g.out[i]) bg.add_fact({"propagates", {g.names[i], g.names[j]}});
      if (with_seed && g.seed[i]) bg.add_fact({"seed", {g.names[i]}});
      bg.add_measurement(g.names[i], "max_influence", g.max_influence[i]);
      bg.add_measurement(g.names[i], "score", g.score[i]);
    }
  }
  return out;
}

}  // namespace

const std::vector<TaskInfo>& task_catalogue() {
  static const std::vector<TaskInfo> all = [] {
    std::vector<TaskInfo> v;
    for (const auto& t : geo_tasks()) v.push_back(t.info);
    for (const auto& t : ip_infos()) v.push_back(t);
    return v;
  }();
  return all;
}

const TaskInfo* find_task(std::string_view name) {
  for (const auto& t : task_catalogue())
    if (t.name == name) return &t;
  return nullptr;
}

const TaskInfo& get_task(std::string_view name) {
  const TaskInfo* t = find_task(name);
  if (!t) throw Error("unknown task '" + std::string(name) + "'");
  return *t;
}

std::vector<std::string> tasks_in(Family f) {
  std::vector<std::string> out;
  for (const auto& t : task_catalogue())
    if (t.family == f) out.push_back(t.name);
  return out;
}

void split_dataset(const Dataset& all, const std::vector<std::string>& order, double ratio, Dataset& train,
                   Dataset& test, std::vector<std::string>& train_ids, std::vector<std::string>& test_ids) {
  std::map<std::string, const Example*> by_id;
  for (const auto& e : all.positives) by_id[e.id] = &e;
  for (const auto& e : all.negatives) by_id[e.id] = &e;
  if (by_id.size() != order.size()) throw Error("split order does not match the dataset");
  const size_t n_train = static_cast<size_t>(std::floor(ratio * double(order.size())));
  train = Dataset{all.background, {}, {}, all.theory_class};
  test = Dataset{all.background, {}, {}, all.theory_class};
  train_ids.clear();
  test_ids.clear();
  for (size_t i = 0; i < order.size(); ++i) {
    auto it = by_id.find(order[i]);
    if (it == by_id.end()) throw Error("unknown example id " + order[i]);
    if (i < n_train) {
      add_example(train, *it->second);
      train_ids.push_back(order[i]);
    } else {
      add_example(test, *it->second);
      test_ids.push_back(order[i]);
    }
  }
}

GeneratedTask generate(const TaskSpec& spec) {
  const TaskInfo& info = get_task(spec.task);
  const int n = spec.n_examples > 0 ? spec.n_examples : (info.family == Family::Ip ? 300 : 200);
  if (n < 2) throw Error("a task needs at least two examples");
  if (!(spec.split_ratio > 0 && spec.split_ratio < 1)) throw Error("split ratio must lie in (0, 1)");
  if (!(spec.margin >= 0)) throw Error("margin must be non-negative");

  GeneratedTask g;
  g.spec = spec;
  g.spec.n_examples = n;
  Rng rng(mix_seed(spec.seed, spec.task));
  Dataset& d = g.all;
  std::vector<Example> examples;
  if (is_ip(spec.task)) {
    examples = generate_ip(spec.task, n, spec.margin, rng, d.background);
    d.theory_class = Theory::LRA;
  } else {
    const GeoTask* t = find_geo(spec.task);
    examples = generate_geo(*t, n, spec.margin, rng, d.background);
    d.theory_class = info.family == Family::Geometry3 || spec.task == "between" || spec.task == "aligned" ||
                             spec.task == "closer_than" || spec.task == "adjacent" || spec.task == "near_corner"
                         ? Theory::NRA
                         : Theory::LRA;
  }
  d.background.declare_predicate(info.head, info.head_arity);
  std::vector<std::string> order;
  for (auto& e : examples) {
    order.push_back(e.id);
    add_example(d, std::move(e));
  }
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  split_dataset(d, order, spec.split_ratio, g.train, g.test, g.train_ids, g.test_ids);
  return g;
}

namespace {

Get background_getter(const Example& ex, const Background& bg) {
  if (!ex.head) throw Error("example " + ex.id + " has no head atom");
  return [&ex, &bg](int pos, const char* attr) {
    const std::string& obj = ex.head->objects.at(pos);
    auto it = ex.measurements.find({obj, attr});
    if (it != ex.measurements.end()) return it->second;
    auto m = bg.measurement(obj, attr);
    if (!m) throw Error("missing measurement " + std::string(attr) + "(" + obj + ")");
    return *m;
  };
}

}  // namespace

bool true_label(std::string_view task, const Example& ex, const Background& bg) {
  if (is_ip(task)) {
    get_task(task);
    if (!ex.head || ex.head->objects.size() != 1) throw Error("graph examples have one head object");
    return ip_label(task, view_of(bg), ex.head->objects[0]);
  }
  const GeoTask* t = find_geo(task);
  if (!t) throw Error("unknown task '" + std::string(task) + "'");
  return t->label(background_getter(ex, bg));
}

double boundary_value(std::string_view task, const Example& ex, const Background& bg) {
  if (is_ip(task)) {
    get_task(task);
    if (!ex.head || ex.head->objects.size() != 1) throw Error("graph examples have one head object");
    return ip_boundary(task, view_of(bg), ex.head->objects[0]);
  }
  const GeoTask* t = find_geo(task);
  if (!t) throw Error("unknown task '" + std::string(task) + "'");
  return t->boundary(background_getter(ex, bg));
}

std::string manifest_text(const GeneratedTask& g) {
  const TaskInfo& info = get_task(g.spec.task);
  std::string s;
  s += "task " + info.name + "\n";
  s += "family " + std::string(to_string(info.family)) + "\n";
  s += "seed " + std::to_string(g.spec.seed) + "\n";
  s += "n " + std::to_string(g.spec.n_examples) + "\n";
  s += "margin " + format_real(g.spec.margin) + "\n";
  s += "split_ratio " + format_real(g.spec.split_ratio) + "\n";
  s += "formula " + info.formula + "\n";
  for (const auto& [k, v] : info.true_params) s += "param " + k + " " + format_real(v) + "\n";
  s += "train";
  for (const auto& id : g.train_ids) s += " " + id;
  s += "\ntest";
  for (const auto& id : g.test_ids) s += " " + id;
  return s + "\n";
}

namespace {

TemplateMode unary(const char* id, const char* type, const char* attr) {
  return {id, {type}, {{0, attr}}, {}, 1};
}
TemplateMode planar(const char* id, const char* type = "point") {
  return {id, {type}, {{0, "x"}, {0, "y"}}, {}, 1};
}
TemplateMode two_points(const char* id) {
  return {id, {"point", "point"}, {{0, "x"}, {0, "y"}, {1, "x"}, {1, "y"}}, {}, 1};
}
TemplateMode three_points(const char* id) {
  return {id, {"point", "point", "point"}, {{0, "x"}, {0, "y"}, {1, "x"}, {1, "y"}, {2, "x"}, {2, "y"}}, {}, 1};
}
ComparisonMode cmp_mode(const char* lt, const char* la, const char* rt, const char* ra,
                        std::vector<Comparator> cs = {Comparator::Lt, Comparator::Le}) {
  ComparisonMode m;
  m.lhs_type = lt;
  m.lhs_attr = la;
  m.rhs_type = rt;
  m.rhs_attr = ra;
  m.comparators = std::move(cs);
  return m;
}

std::vector<TemplateMode> geometry3_templates(std::string_view task) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> sets = {
      {"in_circle", {"circle", "ellipse", "abs_box"}},
      {"in_ellipse", {"ellipse", "circle", "box2d"}},
      {"hyperbola_side", {"hyperbola_side", "product_threshold", "halfplane2d"}},
      {"xy_less_than", {"product_threshold", "hyperbola_side", "halfplane2d"}},
      {"quad_strip", {"quad_strip", "parabola", "interval_y"}},
      {"union_halfplanes", {"halfplane2d", "interval_x", "interval_y"}},
      {"circle_or_box", {"circle", "abs_box", "box2d"}},
      {"piecewise", {"interval_x", "interval_y", "halfplane2d"}},
      {"fallback_region", {"circle", "interval_x", "halfplane2d"}},
      {"donut", {"annulus", "circle", "outside_circle"}},
      {"lshape", {"box2d", "interval_x", "interval_y"}},
      {"above_parabola", {"parabola", "quad_strip", "halfplane2d"}},
      {"sinusoidal", {"sinusoid", "halfplane2d", "interval_y"}},
      {"crescent", {"circle", "parabola", "annulus"}},
  };
  std::vector<TemplateMode> out;
  for (const auto& id : sets.find(task)->second) {
    if (id == "interval_x") {
      out.push_back(unary("interval1d", "point", "x"));
    } else if (id == "interval_y") {
      out.push_back(unary("interval1d", "point", "y"));
    } else {
      out.push_back(planar(id.c_str()));
    }
  }
  return out;
}

}  // namespace

LanguageBias task_bias(std::string_view task) {
  const TaskInfo& info = get_task(task);
  LanguageBias b;
  b.head_predicate = info.head;
  b.max_candidates = 2000;
  using enum Comparator;
  switch (info.family) {
    case Family::Geometry0:
      b.head_types = {"point"};
      b.templates = {unary("interval1d", "point", "x"), unary("interval1d", "point", "y"), planar("halfplane2d")};
      b.literal_budget = 3;
      break;
    case Family::Geometry1: {
      b.head_types = {"point3"};
      b.templates = {unary("interval1d", "point3", "x"), unary("interval1d", "point3", "y"),
                     unary("interval1d", "point3", "z"),
                     {"halfplane3d", {"point3"}, {{0, "x"}, {0, "y"}, {0, "z"}}, {}, 2}};
      b.literal_budget = 6;
      b.max_parametric = 3;
      break;
    }
    case Family::Geometry2: {
      b.literal_budget = 5;
      if (task == "left_of" || task == "closer_than" || task == "adjacent" || task == "near_corner") {
        b.head_types = {"point", "point"};
        b.comparisons = {cmp_mode("point", "x", "point", "x"), cmp_mode("point", "y", "point", "y")};
        b.templates = {two_points("distance_threshold")};
      } else if (task == "touching") {
        b.head_types = {"segment", "segment"};
        b.comparisons = {cmp_mode("segment", "xmin", "segment", "xmax"),
                         cmp_mode("segment", "xmin", "segment", "xmin", {Le}),
                         cmp_mode("segment", "xmax", "segment", "xmax", {Le})};
      } else if (task == "inside") {
        b.head_types = {"point", "region"};
        b.comparisons = {cmp_mode("region", "xmin", "point", "x", {Le, Ge}),
                         cmp_mode("point", "x", "region", "xmax", {Le, Ge}),
                         cmp_mode("region", "ymin", "point", "y", {Le, Ge}),
                         cmp_mode("point", "y", "region", "ymax", {Le, Ge})};
      } else if (task == "overlapping") {
        b.head_types = {"region", "region"};
        b.comparisons = {cmp_mode("region", "xmin", "region", "xmax", {Le}),
                         cmp_mode("region", "ymin", "region", "ymax", {Le})};
      } else if (task == "surrounds") {
        b.head_types = {"region", "region"};
        for (const char* a : {"xmin", "xmax", "ymin", "ymax"})
          b.comparisons.push_back(cmp_mode("region", a, "region", a, {Le}));
      } else {  // between, aligned
        b.head_types = {"point", "point", "point"};
        b.templates = {three_points("collinear3pt"), three_points("between3pt")};
      }
      break;
    }
    case Family::Geometry3:
      b.head_types = {"point"};
      b.templates = geometry3_templates(task);
      b.literal_budget = 6;
      break;
    case Family::Ip:
      b.head_types = {"node"};
      b.predicates = {{"propagates", {"node", "node"}}};
      if (task == "ip1_active" || task == "ip2_active") b.predicates.push_back({"seed", {"node"}});
      b.templates = {unary("influence_threshold", "node", "max_influence"),
                     unary("influence_threshold", "node", "score")};
      b.literal_budget = 4;
      b.max_var_depth = 1;
      b.max_body_vars = 1;
      b.max_parametric = 1;
      break;
  }
  return b;
}

}  // namespace smtilp
