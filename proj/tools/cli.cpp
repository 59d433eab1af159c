#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ddlab/definability.hpp"
#include "ddlab/dualdd.hpp"
#include "ddlab/errors.hpp"
#include "ddlab/gf2.hpp"
#include "ddlab/permlab.hpp"
#include "ddlab/pregeometry.hpp"

namespace ddlab::cli {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string action;
  std::string geometry = "linear";
  std::string construction = "linear";
  unsigned dim = 3;
  std::size_t ground = 0;
  unsigned arity = 2;
  std::size_t max_t = 2;
  std::size_t bound = 2;
  std::optional<std::size_t> max_closed;
  std::optional<std::size_t> max_extension;
  std::optional<std::size_t> rank;
  std::size_t trials = 100;
  std::size_t count = 4;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "json";
  std::string out;
  std::string partition;
  std::string file;
  std::string target;
  std::string set;
  std::string subset;
  std::string family;
  bool compare = false;
  bool all = false;
  bool exhaustive = false;
};

// Collects report lines and tracks whether any of them records a violation.
class Sink {
 public:
  Sink(std::ostream& os, bool table) : os_(os), table_(table) {}

  void emit(const json& line) {
    if (!table_) {
      os_ << line.dump() << '\n';
      return;
    }
    bool first = true;
    for (const auto& [key, value] : line.items()) {
      if (!first) os_ << "  ";
      first = false;
      os_ << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump());
    }
    os_ << '\n';
  }

  void violation() { ++violations_; }
  std::size_t violations() const { return violations_; }

 private:
  std::ostream& os_;
  bool table_;
  std::size_t violations_ = 0;
};

json parse_json_flag(const std::string& text, const std::string& flag) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(flag + " is not valid JSON: " + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + " is not valid JSON: " + e.what());
  }
}

void require_dim(const Options& o, unsigned max_dim) {
  if (o.dim < 1 || o.dim > max_dim) {
    throw ConfigError("--dim must lie in 1.." + std::to_string(max_dim));
  }
}

ClosureOperator make_geometry(const Options& o) {
  GeometryKind kind;
  try {
    kind = geometry_kind_from_string(o.geometry);
  } catch (const std::exception&) {
    throw ConfigError("unknown geometry '" + o.geometry + "'");
  }
  switch (kind) {
    case GeometryKind::linear:
      require_dim(o, 12);
      return ClosureOperator::linear(o.dim);
    case GeometryKind::affine:
      require_dim(o, 12);
      return ClosureOperator::affine(o.dim);
    case GeometryKind::degenerate:
      if (o.partition.empty()) throw ConfigError("degenerate geometry needs --partition");
      return ClosureOperator::degenerate(partition_from_json(parse_json_flag(o.partition, "--partition")));
    case GeometryKind::identity:
      if (o.ground < 1) throw ConfigError("identity geometry needs --ground >= 1");
      return ClosureOperator::identity(o.ground);
    case GeometryKind::custom:
      break;
  }
  throw ConfigError("geometry '" + o.geometry + "' cannot be built from flags");
}

PointSet point_flag(const ClosureOperator& op, const std::string& text, const std::string& flag) {
  if (text.empty()) return {};
  return points_from_json(op, parse_json_flag(text, flag));
}

PointSet label_flag(const std::string& text, const std::string& flag) {
  if (text.empty()) return {};
  const json j = parse_json_flag(text, flag);
  if (!j.is_array()) throw ConfigError(flag + " must be a JSON array");
  return make_point_set(j.get<std::vector<Point>>());
}

VecSet vector_flag(const std::string& text, unsigned dim, const std::string& flag) {
  if (text.empty()) return VecSet(dim);
  return vecset_from_strings(parse_json_flag(text, flag), dim);
}

// ------------------------------------------------------------------ axioms

void cmd_axioms(const Options& o, Sink& sink) {
  const ClosureOperator op = make_geometry(o);
  const std::size_t n = op.ground_size();
  const std::string geometry = to_string(op.kind());
  auto emit = [&](const json& report, bool ok) {
    json line = report;
    line["command"] = "axioms";
    line["geometry"] = geometry;
    line["ground"] = n;
    sink.emit(line);
    if (!ok) sink.violation();
  };
  const AxiomReport closure = check_closure_axioms(op, o.bound);
  emit(to_json(closure), closure.ok());
  const AxiomReport exchange = check_exchange(op, o.bound);
  emit(to_json(exchange), exchange.ok());
  const std::size_t t = std::min(o.max_closed.value_or(o.bound), n);
  const std::size_t u = std::min(o.max_extension.value_or(std::min(n, 2 * t)), std::size_t{64});
  if (u < t) throw ConfigError("--max-extension must be at least --max-closed");
  const AxiomReport homogeneity = check_local_homogeneity(op, t, u);
  emit(to_json(homogeneity), homogeneity.ok());
  if (o.rank) {
    const CardinalityReport card = verify_closure_cardinality(op, *o.rank);
    json line = to_json(card);
    line["axiom"] = "closure-cardinality";
    emit(line, card.ok());
  }
}

// -------------------------------------------------------------- surjection

void surjection_linear(const Options& o, Sink& sink) {
  require_dim(o, 12);
  const unsigned d = o.dim;
  if (o.action == "verify") {
    const std::size_t space = std::size_t{1} << d;
    if (o.max_t > 4) throw ConfigError("--max-t is limited to 4 for linear sweeps");
    for_each_subset_up_to(space, o.max_t, [&](const PointSet& points) {
      const VecSet t(d, std::vector<Bits>(points.begin(), points.end()));
      json line = {{"command", "surjection verify"}, {"construction", "linear"},
                   {"dim", d}, {"t", bit_strings(t)}};
      const bool admissible = preimage_linear_admissible(t);
      line["admissible"] = admissible;
      if (admissible) {
        bool ok = false;
        try {
          const LinearPreimage pre = construct_preimage_linear(t);
          ok = f_linear(pre.preimage) == t;
          line["preimage_size"] = pre.preimage.size();
        } catch (const IntermediateAssertFailed& e) {
          line["error"] = e.what();
        }
        line["ok"] = ok;
        if (!ok) sink.violation();
      }
      sink.emit(line);
      return true;
    });
  } else if (o.action == "preimage") {
    const VecSet t = vector_flag(o.target, d, "--target");
    if (!preimage_linear_admissible(t)) throw ConfigError("target fails the rank precondition");
    const LinearPreimage pre = construct_preimage_linear(t);
    json gens = json::array();
    for (const Vector& g : pre.generators) gens.push_back(to_string(g));
    const bool ok = f_linear(pre.preimage) == t;
    if (!ok) sink.violation();
    sink.emit({{"command", "surjection preimage"}, {"construction", "linear"}, {"dim", d},
               {"t", bit_strings(t)}, {"preimage", bit_strings(pre.preimage)},
               {"u", bit_strings(pre.u_span)}, {"generators", gens}, {"ok", ok}});
  } else {
    const auto pairs = noninjectivity_witnesses_linear(d, o.count);
    for (const auto& [a, b] : pairs) {
      const VecSet fa = f_linear(a);
      const bool ok = a != b && fa == f_linear(b);
      if (!ok) sink.violation();
      sink.emit({{"command", "surjection collisions"}, {"construction", "linear"}, {"dim", d},
                 {"s1", bit_strings(a)}, {"s2", bit_strings(b)}, {"image", bit_strings(fa)},
                 {"ok", ok}});
    }
  }
}

void surjection_general(const Options& o, Sink& sink) {
  const ClosureOperator op = make_geometry(o);
  const GeneralSurjection inst(op);
  const std::string geometry = to_string(op.kind());
  auto base = [&](const std::string& what) {
    return json{{"command", "surjection " + what}, {"construction", "general"},
                {"geometry", geometry}};
  };
  auto preimage_line = [&](const PointSet& t, json line) {
    line["t"] = points_to_json(op, t);
    const bool admissible = inst.admissible(t);
    line["admissible"] = admissible;
    if (!admissible) return line;
    bool ok = false;
    try {
      const GeneralPreimage pre = inst.preimage(t);
      ok = inst.apply(pre.preimage) == t &&
           (pre.trivial_branch || (pre.intermediate_holds && pre.unique_maximum));
      line["preimage"] = points_to_json(op, pre.preimage);
      line["trivial_branch"] = pre.trivial_branch;
      line["intermediate_holds"] = pre.intermediate_holds;
      line["unique_maximum"] = pre.unique_maximum;
    } catch (const Error& e) {
      line["error"] = e.what();
    }
    line["ok"] = ok;
    if (!ok) sink.violation();
    return line;
  };
  if (o.action == "verify") {
    json head = base("verify");
    head["instance"] = inst.describe();
    sink.emit(head);
    if (o.max_t > 4) throw ConfigError("--max-t is limited to 4 for general sweeps");
    for_each_subset_up_to(op.ground_size(), o.max_t, [&](const PointSet& t) {
      sink.emit(preimage_line(t, base("verify")));
      return true;
    });
  } else if (o.action == "preimage") {
    sink.emit(preimage_line(point_flag(op, o.target, "--target"), base("preimage")));
  } else {
    for (const auto& [a, b] : inst.noninjectivity_witnesses(o.count)) {
      const PointSet fa = inst.apply(a);
      const bool ok = a != b && fa == inst.apply(b);
      if (!ok) sink.violation();
      json line = base("collisions");
      line["s1"] = points_to_json(op, a);
      line["s2"] = points_to_json(op, b);
      line["image"] = points_to_json(op, fa);
      line["ok"] = ok;
      sink.emit(line);
    }
  }
}

void cmd_surjection(const Options& o, Sink& sink) {
  if (o.construction == "linear") {
    surjection_linear(o, sink);
  } else if (o.construction == "general") {
    surjection_general(o, sink);
  } else {
    throw ConfigError("--construction must be linear or general");
  }
}

// ----------------------------------------------------------------- support

json support_entry(const Relation& r, const PointSet& e) {
  return {{"support", e}, {"size", e.size()}, {"formula", print_formula(synthesize_formula(r, e))}};
}

void support_sweep(const Options& o, Sink& sink) {
  const std::size_t n = o.ground;
  const unsigned k = o.arity;
  if (n < 4 || k < 1) throw ConfigError("--all needs --ground >= 4 and --arity >= 1");
  std::size_t space = 1;
  for (unsigned i = 0; i < k; ++i) space *= n;
  if (space > 16) throw ConfigError("--all needs N^k <= 16");
  std::size_t ties = 0;
  std::size_t partition_violations = 0;
  std::size_t invalid = 0;
  std::size_t larger_minimal = 0;
  std::size_t ambiguous = 0;
  const std::uint64_t relations = std::uint64_t{1} << space;
  for (std::uint64_t mask = 0; mask < relations; ++mask) {
    const Relation r = Relation::from_mask(n, k, mask);
    const MinimalSupport ms = minimal_support(r);
    if (ms.ambiguous) ++ambiguous;
    try {
      const RecursiveSupport rs = support_recursive(r);
      synthesize_formula(r, rs.support);
      if (ms.support.size() > rs.support.size()) ++larger_minimal;
    } catch (const MajorityTie&) {
      ++ties;
    } catch (const PartitionViolation&) {
      ++partition_violations;
    } catch (const Error&) {
      ++invalid;
    }
  }
  const bool ok = invalid == 0 && larger_minimal == 0 && partition_violations == 0;
  if (!ok) sink.violation();
  sink.emit({{"command", "support"}, {"mode", "all"}, {"n", n}, {"k", k},
             {"relations", relations}, {"majority_ties", ties},
             {"partition_violations", partition_violations}, {"invalid", invalid},
             {"minimal_larger_than_recursive", larger_minimal},
             {"ambiguous_minimal", ambiguous}, {"ok", ok}});
}

void cmd_support(const Options& o, Sink& sink) {
  if (o.all) {
    support_sweep(o, sink);
    return;
  }
  if (o.file.empty()) throw ConfigError("support needs --file or --all");
  const Relation r = relation_from_json(read_json_file(o.file));
  const MinimalSupport ms = minimal_support(r);
  json minimal = support_entry(r, ms.support);
  minimal["ambiguous"] = ms.ambiguous;
  minimal["candidates"] = ms.minimum_candidates;
  json line = {{"command", "support"}, {"n", r.ground_size()}, {"k", r.arity()},
               {"minimal", minimal}};
  if (o.compare) {
    try {
      const RecursiveSupport rs = support_recursive(r);
      line["recursive"] = support_entry(r, rs.support);
      const bool ok = ms.support.size() <= rs.support.size();
      line["minimal_not_larger"] = ok;
      if (!ok) sink.violation();
    } catch (const MajorityTie& e) {
      line["recursive"] = {{"error", e.kind()}, {"message", e.what()}};
    }
  }
  sink.emit(line);
}

void cmd_synth(const Options& o, Sink& sink) {
  if (o.file.empty()) throw ConfigError("synth needs --file");
  const Relation r = relation_from_json(read_json_file(o.file));
  const PointSet e = o.set.empty() ? minimal_support(r).support : label_flag(o.set, "--set");
  const Formula f = synthesize_formula(r, e);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < r.tuple_space(); ++i) {
    if (evaluate(f, r.decode(i)) == r.contains_index(i)) ++agree;
  }
  const bool exact = agree == r.tuple_space();
  if (!exact) sink.violation();
  sink.emit({{"command", "synth"}, {"n", r.ground_size()}, {"k", r.arity()},
             {"parameters", e}, {"disjuncts", f.body.children.size()},
             {"formula", print_formula(f)}, {"tuples_checked", r.tuple_space()},
             {"exact", exact}});
}

// ------------------------------------------------------------ group actions

void cmd_orbits(const Options& o, Sink& sink) {
  require_dim(o, 12);
  const VecSet e = vector_flag(o.set, o.dim, "--set");
  const OrbitPartition p = stabilizer_orbits(e);
  const bool ok = std::all_of(p.witnesses.begin(), p.witnesses.end(),
                              [&](const MovingMap& w) { return verify_moving_map(e, w); });
  if (!ok) sink.violation();
  json line = to_json(p);
  line["command"] = "orbits";
  line["witnesses_verified"] = ok;
  sink.emit(line);
}

void cmd_dichotomy(const Options& o, Sink& sink) {
  require_dim(o, 12);
  const VecSet e = vector_flag(o.set, o.dim, "--set");
  const VecSet fixed(o.dim, materialize_span(rref_basis(e.members())));
  auto consistent = [&](const VecSet& b, const DichotomyReport& rep) {
    switch (rep.result) {
      case DichotomyCase::subset_of_span:
        return b.is_subset_of(fixed);
      case DichotomyCase::complement_subset_of_span:
        return VecSet::full(o.dim).minus(b).is_subset_of(fixed);
      case DichotomyCase::not_invariant:
        return rep.witness && verify_moving_map(e, *rep.witness) && b.contains(rep.witness->u) &&
               !b.contains(rep.witness->v);
    }
    return false;
  };
  if (!o.subset.empty()) {
    const VecSet b = vector_flag(o.subset, o.dim, "--subset");
    const DichotomyReport rep = check_dichotomy(b, e);
    const bool ok = consistent(b, rep);
    if (!ok) sink.violation();
    json line = to_json(rep);
    line["command"] = "dichotomy";
    line["b"] = bit_strings(b);
    line["e"] = bit_strings(e);
    line["verified"] = ok;
    sink.emit(line);
    return;
  }
  if (o.dim > 4) throw ConfigError("a full dichotomy sweep needs --dim <= 4");
  const std::size_t space = std::size_t{1} << o.dim;
  std::size_t invariant = 0;
  std::size_t moved = 0;
  std::size_t exceptions = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << space); ++mask) {
    std::vector<Bits> members;
    for (Bits v = 0; v < space; ++v) {
      if ((mask >> v) & 1u) members.push_back(v);
    }
    const VecSet b(o.dim, std::move(members));
    const DichotomyReport rep = check_dichotomy(b, e);
    (rep.result == DichotomyCase::not_invariant ? moved : invariant)++;
    if (!consistent(b, rep)) ++exceptions;
  }
  if (exceptions) sink.violation();
  sink.emit({{"command", "dichotomy"}, {"mode", "all"}, {"dim", o.dim}, {"e", bit_strings(e)},
             {"subsets", std::uint64_t{1} << space}, {"invariant", invariant},
             {"not_invariant", moved}, {"exceptions", exceptions}});
}

void cmd_equivariance(const Options& o, Sink& sink) {
  EquivarianceReport rep;
  if (o.construction == "linear") {
    if (o.exhaustive) {
      require_dim(o, 4);
      rep = check_equivariance_linear_exhaustive(o.dim, o.bound);
    } else {
      require_dim(o, 10);
      rep = check_equivariance_linear(o.dim, o.trials, o.seed);
    }
  } else if (o.construction == "general") {
    rep = check_equivariance_general(GeneralSurjection(make_geometry(o)), o.trials, o.seed);
  } else if (o.construction == "synthesis") {
    if (o.ground < 2) throw ConfigError("synthesis equivariance needs --ground >= 2");
    rep = check_synthesis_equivariance(o.ground, o.arity, o.trials, o.seed);
  } else {
    throw ConfigError("--construction must be linear, general or synthesis");
  }
  if (rep.failures) sink.violation();
  json line = to_json(rep);
  line["command"] = "equivariance";
  sink.emit(line);
}

void cmd_sigma(const Options& o, Sink& sink) {
  if (o.ground < 1) throw ConfigError("sigma needs --ground >= 1");
  const PointSet e = label_flag(o.set, "--set");
  std::vector<PointSet> family;
  if (!o.family.empty()) {
    const json j = parse_json_flag(o.family, "--family");
    for (const auto& s : j) family.push_back(make_point_set(s.get<std::vector<Point>>()));
  }
  for (const auto& s : family) {
    if (!s.empty() && s.back() >= o.ground) throw ConfigError("family member outside the ground set");
  }
  const Partition classes = sigma_classes(o.ground, e, family);
  const double bound = static_cast<double>(e.size()) + std::ldexp(1.0, static_cast<int>(family.size()));
  const bool within = static_cast<double>(classes.size()) <= bound;
  json line = {{"command", "sigma"}, {"n", o.ground}, {"e", e}, {"family_size", family.size()},
               {"classes", classes}, {"class_count", classes.size()}, {"bound", bound},
               {"within_bound", within}};
  bool ok = within;
  if (!o.subset.empty()) {
    const PointSet t = label_flag(o.subset, "--subset");
    const auto w = nonunion_witness(classes, t);
    line["t"] = t;
    line["union_of_classes"] = !w.has_value();
    if (w) {
      const bool verified = verify_transposition_witness(e, family, t, w->first, w->second);
      line["witness"] = {w->first, w->second};
      line["witness_verified"] = verified;
      ok = ok && verified;
    }
  }
  if (!ok) sink.violation();
  sink.emit(line);
}

void dispatch(const Options& o, Sink& sink) {
  if (o.command == "axioms") return cmd_axioms(o, sink);
  if (o.command == "surjection") return cmd_surjection(o, sink);
  if (o.command == "support") return cmd_support(o, sink);
  if (o.command == "synth") return cmd_synth(o, sink);
  if (o.command == "orbits") return cmd_orbits(o, sink);
  if (o.command == "dichotomy") return cmd_dichotomy(o, sink);
  if (o.command == "equivariance") return cmd_equivariance(o, sink);
  if (o.command == "sigma") return cmd_sigma(o, sink);
  throw ConfigError("unknown command '" + o.command + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Finite verification harness for pregeometries, surjections and definability"};
  app.name("ddlab");
  app.require_subcommand(1);
  app.fallthrough(true);

  app.add_option("--geometry", o.geometry, "linear|affine|degenerate|identity");
  app.add_option("--construction", o.construction, "linear|general|synthesis");
  app.add_option("--dim", o.dim, "vector space dimension");
  app.add_option("--ground", o.ground, "ground set size");
  app.add_option("--arity", o.arity, "relation arity");
  app.add_option("--max-t", o.max_t, "largest target size in sweeps");
  app.add_option("--bound", o.bound, "subset size bound for checkers");
  app.add_option("--max-closed", o.max_closed, "homogeneity bound on |T|");
  app.add_option("--max-extension", o.max_extension, "homogeneity bound on |U|");
  app.add_option("--rank", o.rank, "also check closure cardinality of independent k-sets");
  app.add_option("--trials", o.trials, "random trials");
  app.add_option("--count", o.count, "number of witnesses");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--format", o.format, "json|table")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--out", o.out, "write the report here instead of stdout");
  app.add_option("--partition", o.partition, "JSON list of blocks");
  app.add_option("--file", o.file, "relation file");
  app.add_option("--target", o.target, "JSON target set");
  app.add_option("--set", o.set, "JSON parameter set E");
  app.add_option("--subset", o.subset, "JSON subset B or T");
  app.add_option("--family", o.family, "JSON list of sets S_i");
  app.add_flag("--compare", o.compare, "also run the recursive support construction");
  app.add_flag("--all", o.all, "sweep every relation of the given shape");
  app.add_flag("--exhaustive", o.exhaustive, "enumerate instead of sampling");

  for (const char* name : {"axioms", "support", "synth", "orbits", "dichotomy", "equivariance",
                           "sigma"}) {
    app.add_subcommand(name)->callback([&o, name] { o.command = name; });
  }
  auto* surjection = app.add_subcommand("surjection");
  surjection->add_option("action", o.action, "verify|preimage|collisions")
      ->required()
      ->check(CLI::IsMember({"verify", "preimage", "collisions"}));
  surjection->callback([&o] { o.command = "surjection"; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) {
      err << "cannot open " << o.out << " for writing\n";
      return kExitConfig;
    }
  }
  std::ostream& target = o.out.empty() ? out : file;
  Sink sink(target, o.format == "table");
  try {
    dispatch(o, sink);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    sink.emit({{"command", o.command}, {"error", e.kind()}, {"message", e.what()}});
    return kExitViolations;
  }
  target.flush();
  return sink.violations() == 0 ? kExitOk : kExitViolations;
}

}  // namespace ddlab::cli
