#include "sdecmp/zdual/functional.hpp"

#include <cmath>
#include <sstream>

#include "sdecmp/core/errors.hpp"

namespace sdecmp {

double ScalarMap::operator()(double u) const {
  switch (kind_) {
    case Kind::identity: return u;
    case Kind::square: return u * u;
    case Kind::abs: return std::abs(u);
    case Kind::sin: return std::sin(u);
    case Kind::cos: return std::cos(u);
    case Kind::tanh: return std::tanh(u);
    case Kind::logistic: return 1.0 / (1.0 + std::exp(-u));
    case Kind::exp: return std::exp(u);
    case Kind::affine: return a_ * u + b_;
  }
  return u;
}

bool ScalarMap::bounded() const {
  return kind_ == Kind::sin || kind_ == Kind::cos || kind_ == Kind::tanh ||
         kind_ == Kind::logistic || (kind_ == Kind::affine && a_ == 0.0);
}

bool ScalarMap::nonnegative() const {
  return kind_ == Kind::square || kind_ == Kind::abs || kind_ == Kind::logistic ||
         kind_ == Kind::exp || (kind_ == Kind::affine && a_ == 0.0 && b_ >= 0.0);
}

bool ScalarMap::convex() const {
  return kind_ == Kind::identity || kind_ == Kind::square || kind_ == Kind::abs ||
         kind_ == Kind::exp || kind_ == Kind::affine;
}

std::string ScalarMap::name() const {
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::square: return "square";
    case Kind::abs: return "abs";
    case Kind::sin: return "sin";
    case Kind::cos: return "cos";
    case Kind::tanh: return "tanh";
    case Kind::logistic: return "logistic";
    case Kind::exp: return "exp";
    case Kind::affine: {
      std::ostringstream s;
      s << "affine(" << a_ << "," << b_ << ")";
      return s.str();
    }
  }
  return "?";
}

ScalarMap ScalarMap::parse(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "square") return square();
  if (name == "abs") return absolute();
  if (name == "sin") return sine();
  if (name == "cos") return cosine();
  if (name == "tanh") return hyperbolic_tangent();
  if (name == "logistic") return logistic();
  if (name == "exp") return exponential();
  throw ConfigError("unknown scalar map '" + name + "'");
}

PathFunctional PathFunctional::constant(double c) { return PathFunctional(Constant{c}); }

PathFunctional PathFunctional::coordinate(double t, std::size_t i) {
  return PathFunctional(Coordinate{t, i});
}

PathFunctional PathFunctional::cylinder(ScalarMap phi, double t, std::size_t i) {
  return PathFunctional(Cylinder{phi, t, i});
}

PathFunctional PathFunctional::exponential(TestFunction f, double t) {
  return PathFunctional(Exponential{std::move(f), t});
}

PathFunctional PathFunctional::operator+(const PathFunctional& other) const {
  return PathFunctional(Sum{std::make_shared<const PathFunctional>(*this),
                            std::make_shared<const PathFunctional>(other)});
}

PathFunctional PathFunctional::operator*(const PathFunctional& other) const {
  return PathFunctional(Product{std::make_shared<const PathFunctional>(*this),
                                std::make_shared<const PathFunctional>(other)});
}

PathFunctional PathFunctional::scaled(double c) const {
  return PathFunctional(Scaled{std::make_shared<const PathFunctional>(*this), c});
}

PathFunctional PathFunctional::mapped(ScalarMap phi) const {
  return PathFunctional(Mapped{std::make_shared<const PathFunctional>(*this), phi});
}

namespace {

std::size_t knot_of(double t, const TimeGrid& grid) {
  return t < 0.0 ? grid.n_steps() : grid.knot_at(t);
}

double coordinate_value(const PathView& path, const TimeGrid& grid, double t, std::size_t i) {
  if (i >= path.dim) throw ConfigError("functional references coordinate " + std::to_string(i));
  return path.at(knot_of(t, grid), i);
}

}  // namespace

double PathFunctional::evaluate(const PathView& path, const TimeGrid& grid) const {
  struct Visitor {
    const PathView& path;
    const TimeGrid& grid;
    double operator()(const Constant& n) const { return n.c; }
    double operator()(const Coordinate& n) const { return coordinate_value(path, grid, n.t, n.i); }
    double operator()(const Cylinder& n) const {
      return n.phi(coordinate_value(path, grid, n.t, n.i));
    }
    double operator()(const Exponential& n) const {
      const std::size_t k_end = knot_of(n.t, grid);
      const std::size_t dim = path.dim;
      if (n.f.dim() != dim) throw ConfigError("exponential functional: dimension mismatch");
      std::vector<double> f(dim);
      double log = 0.0;
      for (std::size_t k = 0; k < k_end; ++k) {
        n.f.evaluate(grid.time(k), f);
        for (std::size_t i = 0; i < dim; ++i) {
          log += f[i] * (path.at(k + 1, i) - path.at(k, i)) - 0.5 * f[i] * f[i] * grid.dt();
        }
      }
      return std::exp(log);
    }
    double operator()(const Sum& n) const { return n.a->evaluate(path, grid) + n.b->evaluate(path, grid); }
    double operator()(const Product& n) const {
      return n.a->evaluate(path, grid) * n.b->evaluate(path, grid);
    }
    double operator()(const Scaled& n) const { return n.c * n.a->evaluate(path, grid); }
    double operator()(const Mapped& n) const { return n.phi(n.a->evaluate(path, grid)); }
  };
  return std::visit(Visitor{path, grid}, node_);
}

bool PathFunctional::bounded() const {
  struct Visitor {
    bool operator()(const Constant&) const { return true; }
    bool operator()(const Coordinate&) const { return false; }
    bool operator()(const Cylinder& n) const { return n.phi.bounded(); }
    bool operator()(const Exponential&) const { return false; }
    bool operator()(const Sum& n) const { return n.a->bounded() && n.b->bounded(); }
    bool operator()(const Product& n) const { return n.a->bounded() && n.b->bounded(); }
    bool operator()(const Scaled& n) const { return n.a->bounded(); }
    bool operator()(const Mapped& n) const { return n.phi.bounded() || n.a->bounded(); }
  };
  return std::visit(Visitor{}, node_);
}

bool PathFunctional::nonnegative() const {
  struct Visitor {
    bool operator()(const Constant& n) const { return n.c >= 0.0; }
    bool operator()(const Coordinate&) const { return false; }
    bool operator()(const Cylinder& n) const { return n.phi.nonnegative(); }
    bool operator()(const Exponential&) const { return true; }
    bool operator()(const Sum& n) const { return n.a->nonnegative() && n.b->nonnegative(); }
    bool operator()(const Product& n) const { return n.a->nonnegative() && n.b->nonnegative(); }
    bool operator()(const Scaled& n) const { return n.c >= 0.0 && n.a->nonnegative(); }
    bool operator()(const Mapped& n) const { return n.phi.nonnegative(); }
  };
  return std::visit(Visitor{}, node_);
}

std::string PathFunctional::describe() const {
  struct Visitor {
    std::string operator()(const Constant& n) const {
      std::ostringstream s;
      s << n.c;
      return s.str();
    }
    std::string operator()(const Coordinate& n) const {
      std::ostringstream s;
      s << "w" << n.i << "(" << (n.t < 0 ? std::string("T") : std::to_string(n.t)) << ")";
      return s.str();
    }
    std::string operator()(const Cylinder& n) const {
      return n.phi.name() + "(" + Visitor{}(Coordinate{n.t, n.i}) + ")";
    }
    std::string operator()(const Exponential&) const { return "E(f)"; }
    std::string operator()(const Sum& n) const { return "(" + n.a->describe() + " + " + n.b->describe() + ")"; }
    std::string operator()(const Product& n) const { return n.a->describe() + " * " + n.b->describe(); }
    std::string operator()(const Scaled& n) const {
      std::ostringstream s;
      s << n.c << " * " << n.a->describe();
      return s.str();
    }
    std::string operator()(const Mapped& n) const { return n.phi.name() + "(" + n.a->describe() + ")"; }
  };
  return std::visit(Visitor{}, node_);
}

}  // namespace sdecmp
