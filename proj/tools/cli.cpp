#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "hhash/baselines.hpp"
#include "hhash/dataio.hpp"
#include "hhash/errors.hpp"
#include "hhash/retrieval.hpp"
#include "hhash/trainer.hpp"

namespace hhash::cli {

namespace {

struct SynthArgs {
  std::string out_prefix;
  int n_per_class = 256;
  int classes = 8;
  int bits = 16;
  double sigma = 0.1;
  std::uint64_t seed = 0;
  int query_per_class = -1;
  int db_per_class = -1;
};

struct FitArgs {
  std::string embeddings;
  std::string loss = "l2";
  std::optional<double> lr;
  int epochs = 300;
  int batch = 128;
  std::uint64_t seed = 0;
  std::string out;
  std::string log;
};

struct ItqArgs {
  std::string embeddings;
  int iters = 50;
  std::uint64_t seed = 0;
  bool center = false;
  std::string out;
};

struct HashArgs {
  std::string embeddings;
  std::string rotation;
  std::string mean;
  std::string out;
};

struct EvalArgs {
  std::string query_emb, query_hash, query_labels;
  std::string db_emb, db_hash, db_labels;
  int k = 0;
  bool verbose = false;
};

std::ostream& fmt(std::ostream& os) { return os << std::setprecision(10); }

void do_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg;
  cfg.n_per_class = a.n_per_class;
  cfg.num_classes = a.classes;
  cfg.k = a.bits;
  cfg.noise_sigma = a.sigma;
  cfg.planted_rotation_seed = a.seed;
  cfg.sample_seed = a.seed + 1;
  cfg.query_per_class = a.query_per_class;
  cfg.database_per_class = a.db_per_class;
  const SynthData data = generate_rotated_hypercube(cfg);
  const std::pair<const char*, const EmbeddingSet*> splits[] = {
      {"train", &data.train}, {"query", &data.query}, {"database", &data.database}};
  for (const auto& [name, set] : splits) {
    write_emb1(a.out_prefix + name + ".emb", set->data);
    write_labels(a.out_prefix + name + ".labels", *set->labels);
    out << name << ": " << set->n() << " x " << set->k() << "\n";
  }
  write_rot1(a.out_prefix + "planted.rot", decompose_orthogonal(data.rotation.transpose()));
}

void do_fit(const FitArgs& a, std::ostream& out) {
  TrainConfig cfg = TrainConfig::for_loss(parse_loss_kind(a.loss));
  if (a.lr) cfg.learning_rate = *a.lr;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.seed = a.seed;
  const FitResult result = fit(EmbeddingSet(read_emb1(a.embeddings)), cfg);
  write_rot1(a.out, result.stack);
  if (!a.log.empty()) {
    std::ofstream log(a.log, std::ios::trunc);
    if (!log) throw Error("cannot write " + a.log);
    log << std::setprecision(10);
    for (std::size_t e = 0; e < result.report.epoch_losses.size(); ++e)
      log << e << '\t' << result.report.epoch_losses[e] << '\n';
  }
  out << fmt << "initial_loss = " << result.report.initial_loss << "\n"
      << "final_loss = " << result.report.final_loss << "\n";
}

void do_itq(const ItqArgs& a, std::ostream& out) {
  ItqConfig cfg;
  cfg.iterations = a.iters;
  cfg.seed = a.seed;
  cfg.center = a.center;
  const ItqResult result = itq_fit(EmbeddingSet(read_emb1(a.embeddings)), cfg);
  write_rot1(a.out, result.to_stack());
  if (result.mean) write_emb1(a.out + ".mean", result.mean->transpose());
  out << fmt << "objective = " << result.objective.back() << "\n";
}

void do_hash(const HashArgs& a, std::ostream& out) {
  Matrix data = read_emb1(a.embeddings);
  if (!a.mean.empty()) {
    const Matrix mean = read_emb1(a.mean);
    if (mean.rows() != 1) throw DimensionError("mean file must hold exactly one row");
    data = center_rows(data, mean.row(0).transpose());
  }
  std::optional<HouseholderStack> stack;
  if (!a.rotation.empty()) stack = read_rot1(a.rotation);
  const BitCodeSet codes = sign_binarize(data, stack ? &*stack : nullptr);
  write_hsh1(a.out, codes);
  out << "hashed " << codes.n() << " items to " << codes.k() << " bits\n";
}

void do_eval(const EvalArgs& a, std::ostream& out) {
  const EmbeddingSet query = load_embedding_set(a.query_emb, a.query_labels);
  const EmbeddingSet db = load_embedding_set(a.db_emb, a.db_labels);
  const BitCodeSet query_codes = read_hsh1(a.query_hash);
  const BitCodeSet db_codes = read_hsh1(a.db_hash);
  const RetrievalResult r = map_at_k(query, query_codes, db, db_codes, a.k);
  out << fmt << "map@" << a.k << " = " << r.map_at_k << "\n";
  if (a.verbose) {
    for (std::size_t q = 0; q < r.per_query_ap.size(); ++q)
      out << "ap[" << q << "] = " << r.per_query_ap[q] << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Householder quantization of embeddings into binary hash codes"};
  app.name("hhash");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a rotated-hypercube dataset (train/query/database)");
  s->add_option("--out-prefix", synth.out_prefix, "Prefix for the output files")->required();
  s->add_option("--n-per-class", synth.n_per_class, "Training points per class")->capture_default_str();
  s->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();
  s->add_option("--bits", synth.bits, "Embedding width k")->capture_default_str();
  s->add_option("--sigma", synth.sigma, "Gaussian noise standard deviation")->capture_default_str();
  s->add_option("--seed", synth.seed, "Seed (rotation uses seed, samples seed+1)")->capture_default_str();
  s->add_option("--query-per-class", synth.query_per_class, "Query points per class (-1: n/8)")
      ->capture_default_str();
  s->add_option("--db-per-class", synth.db_per_class, "Database points per class (-1: 4x query)")
      ->capture_default_str();

  FitArgs fit_args;
  auto* f = app.add_subcommand("fit", "Train a Householder rotation minimizing quantization error");
  f->add_option("--embeddings", fit_args.embeddings, "EMB1 input")->required();
  f->add_option("--loss", fit_args.loss, "Quantization loss")
      ->check(CLI::IsMember({"l2", "l1", "min-entry", "bit-var"}))
      ->capture_default_str();
  f->add_option("--lr", fit_args.lr, "Learning rate [default: 0.1, or 0.01 for bit-var]");
  f->add_option("--epochs", fit_args.epochs, "Training epochs")->capture_default_str();
  f->add_option("--batch", fit_args.batch, "Mini-batch size")->capture_default_str();
  f->add_option("--seed", fit_args.seed, "Seed for initialization and shuffling")->capture_default_str();
  f->add_option("--out", fit_args.out, "ROT1 output")->required();
  f->add_option("--log", fit_args.log, "Optional per-epoch loss log (epoch<TAB>loss)");

  ItqArgs itq_args;
  auto* i = app.add_subcommand("itq", "Fit the ITQ baseline rotation");
  i->add_option("--embeddings", itq_args.embeddings, "EMB1 input")->required();
  i->add_option("--iters", itq_args.iters, "Iterations")->capture_default_str();
  i->add_option("--seed", itq_args.seed, "Seed for the initial rotation")->capture_default_str();
  i->add_flag("--center", itq_args.center, "Subtract column means (written to <out>.mean)");
  i->add_option("--out", itq_args.out, "ROT1 output")->required();

  HashArgs hash_args;
  auto* h = app.add_subcommand("hash", "Binarize embeddings, optionally after a rotation");
  h->add_option("--embeddings", hash_args.embeddings, "EMB1 input")->required();
  h->add_option("--rotation", hash_args.rotation, "ROT1 rotation to apply before sign()");
  h->add_option("--mean", hash_args.mean, "EMB1 mean row from 'itq --center'");
  h->add_option("--out", hash_args.out, "HSH1 output")->required();

  EvalArgs eval_args;
  auto* e = app.add_subcommand("eval", "Compute mAP@k of Hamming ranking with cosine tie-breaks");
  e->add_option("--query-emb", eval_args.query_emb, "Query EMB1")->required();
  e->add_option("--query-hash", eval_args.query_hash, "Query HSH1")->required();
  e->add_option("--query-labels", eval_args.query_labels, "Query labels")->required();
  e->add_option("--db-emb", eval_args.db_emb, "Database EMB1")->required();
  e->add_option("--db-hash", eval_args.db_hash, "Database HSH1")->required();
  e->add_option("--db-labels", eval_args.db_labels, "Database labels")->required();
  e->add_option("--k", eval_args.k, "Cutoff of mAP@k (no default)")->required()->check(CLI::PositiveNumber);
  e->add_flag("--verbose", eval_args.verbose, "Also print the AP of every query");

  std::vector<std::string> info_files;
  auto* n = app.add_subcommand("info", "Describe EMB1/ROT1/HSH1/label files");
  n->add_option("files", info_files, "Files to describe")->required();

  std::vector<const char*> argv{"hhash"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }

  try {
    if (*s) do_synth(synth, out);
    else if (*f) do_fit(fit_args, out);
    else if (*i) do_itq(itq_args, out);
    else if (*h) do_hash(hash_args, out);
    else if (*e) do_eval(eval_args, out);
    else if (*n) {
      for (const auto& file : info_files) out << describe_file(file);
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hhash::cli
