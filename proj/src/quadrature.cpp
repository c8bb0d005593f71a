#include "electroelastic/quadrature.hpp"

namespace electroelastic {

namespace {

// Adds all distinct permutations of a 4-tuple of barycentric coordinates of the
// form (a, a, a, b) or (a, a, b, b).
void add_orbit_31(TetRule& rule, double a, double w) {
  const double b = 1.0 - 3.0 * a;
  rule.points.push_back({a, a, a, b});
  rule.points.push_back({a, a, b, a});
  rule.points.push_back({a, b, a, a});
  rule.points.push_back({b, a, a, a});
  for (int i = 0; i < 4; ++i) rule.weights.push_back(w);
}

void add_orbit_22(TetRule& rule, double a, double w) {
  const double b = 0.5 - a;
  rule.points.push_back({a, a, b, b});
  rule.points.push_back({a, b, a, b});
  rule.points.push_back({a, b, b, a});
  rule.points.push_back({b, a, a, b});
  rule.points.push_back({b, a, b, a});
  rule.points.push_back({b, b, a, a});
  for (int i = 0; i < 6; ++i) rule.weights.push_back(w);
}

void add_orbit_21(TriangleRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.points.push_back({a, a, b});
  rule.points.push_back({a, b, a});
  rule.points.push_back({b, a, a});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

TetRule make_tet1() {
  TetRule r;
  r.degree = 1;
  r.points.push_back({0.25, 0.25, 0.25, 0.25});
  r.weights.push_back(1.0);
  return r;
}

TetRule make_tet2() {
  TetRule r;
  r.degree = 2;
  add_orbit_31(r, 0.1381966011250105151795413165634, 0.25);
  return r;
}

// 14-point degree-5 rule (Walkington), all weights positive.
TetRule make_tet5() {
  TetRule r;
  r.degree = 5;
  add_orbit_31(r, 0.0927352503108912264023239137370, 0.0734930431163619495437102054863);
  add_orbit_31(r, 0.3108859192633006097973457337635, 0.1126879257180158507991856523333);
  add_orbit_22(r, 0.0455037041256496494918805262794, 0.0425460207770814664380694281203);
  return r;
}

TriangleRule make_tri2() {
  TriangleRule r;
  r.degree = 2;
  add_orbit_21(r, 1.0 / 6.0, 1.0 / 3.0);
  return r;
}

// 7-point degree-5 rule (Radon).
TriangleRule make_tri5() {
  TriangleRule r;
  r.degree = 5;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(0.225);
  add_orbit_21(r, 0.1012865073234563388009873619151, 0.1259391805448271525956839455001);
  add_orbit_21(r, 0.4701420641051150897704412095134, 0.1323941527885061807376493878332);
  return r;
}

}  // namespace

const TetRule& tet_rule_degree1() {
  static const TetRule rule = make_tet1();
  return rule;
}

const TetRule& tet_rule_degree2() {
  static const TetRule rule = make_tet2();
  return rule;
}

const TetRule& tet_rule_degree5() {
  static const TetRule rule = make_tet5();
  return rule;
}

const TriangleRule& triangle_rule_degree2() {
  static const TriangleRule rule = make_tri2();
  return rule;
}

const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = make_tri5();
  return rule;
}

}  // namespace electroelastic
