// jacprop: gradient checks, SGD training, convolution lowering and evaluation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jacprop/convlower.hpp"
#include "jacprop/dataset.hpp"
#include "jacprop/errors.hpp"
#include "jacprop/gradcheck.hpp"
#include "jacprop/matrix_text.hpp"
#include "jacprop/model_io.hpp"
#include "jacprop/train.hpp"

namespace {

using namespace jacprop;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

struct GradcheckOptions {
  std::uint64_t seed = 1;
  std::string layers = "4,5,3";
  std::string head = "softmax_ce";
  std::string activation = "relu";
  double tol = 1e-6;
  double reference_tol = 1e-12;
  std::size_t samples = 1;
  std::string log_path;
};

NetworkShape shape_from_options(const GradcheckOptions& opt) {
  NetworkShape shape;
  for (const std::string& w : split(opt.layers, ',')) shape.widths.push_back(std::stoul(w));
  shape.head = parse_head(opt.head);
  const std::vector<std::string> acts = split(opt.activation, ',');
  const std::size_t hidden = shape.widths.size() < 2 ? 0 : shape.widths.size() - 2;
  for (std::size_t l = 0; l < hidden; ++l) {
    shape.hidden_activations.push_back(parse_activation(acts.size() == 1 ? acts[0] : acts.at(l)));
  }
  shape.validate();
  return shape;
}

int run_gradcheck(const GradcheckOptions& opt) {
  const NetworkShape shape = shape_from_options(opt);
  Rng rng(opt.seed);
  const Network network = init_network(shape, rng);
  std::ofstream log;
  if (!opt.log_path.empty()) {
    log.open(opt.log_path);
    if (!log) throw Error("cannot open " + opt.log_path);
  }
  std::printf("network %s, head %s, %zu parameters, seed %llu\n", opt.layers.c_str(),
              opt.head.c_str(), network.param_count(),
              static_cast<unsigned long long>(opt.seed));
  bool all_pass = true;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    DenseVector x = random_input(network.input_dim(), rng);
    while (near_relu_kink(network, x)) x = random_input(network.input_dim(), rng);
    const Target y = random_target(shape.head, network.output_dim(), rng);
    const TriangleReport t = oracle_triangle(network, x, y, opt.reference_tol, opt.tol);
    all_pass = all_pass && t.pass;
    std::printf("sample %zu  loss %.6g\n", s, t.loss);
    std::cout << format_report(t.structured_vs_reference, "structured vs reference")
              << format_report(t.structured_vs_fd, "structured vs finite diff")
              << format_report(t.reference_vs_fd, "reference vs finite diff");
    if (log.is_open()) {
      const nlohmann::json line = {{"sample", s},
                                   {"seed", opt.seed},
                                   {"loss", t.loss},
                                   {"structured_vs_reference", report_to_json(t.structured_vs_reference)},
                                   {"structured_vs_fd", report_to_json(t.structured_vs_fd)},
                                   {"reference_vs_fd", report_to_json(t.reference_vs_fd)},
                                   {"pass", t.pass}};
      log << line.dump() << '\n';
    }
  }
  std::printf("%s\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

int run_train(const std::string& config_path) {
  const TrainConfig config = load_train_config(config_path);
  const TrainResult result = run_training(config, [](const EpochRecord& record) {
    std::cout << to_json(record).dump() << std::endl;
  });
  for (const std::string& line : result.gate.details) std::cerr << "gradcheck gate: " << line << '\n';
  if (!config.model_path.empty()) std::cerr << "model written to " << config.model_path << '\n';
  return 0;
}

struct LowerOptions {
  std::string input_shape;
  std::string kernel_path;
  std::string bias_path;
  std::string out_path;
  bool print_matrices = false;
};

int run_lower_conv(const LowerOptions& opt) {
  const std::vector<std::string> dims = split(opt.input_shape, 'x');
  if (dims.size() != 2) throw Error("--input-shape must look like HxW");
  ConvSpec spec;
  spec.input = {std::stoul(dims[0]), std::stoul(dims[1])};
  spec.kernels = read_matrices_file(opt.kernel_path);
  if (!opt.bias_path.empty()) spec.biases = read_matrices_file(opt.bias_path);
  const DenseLayer layer = lower_conv_layer(spec, std::nullopt);
  const Network network({layer}, HeadKind::IdentitySE);
  save_model_file(network, opt.out_path);

  const ImageShape out = spec.output();
  std::printf("input        %zux%zu (vectorized row-major, length %zu)\n", spec.input.rows,
              spec.input.cols, spec.input.rows * spec.input.cols);
  std::printf("filters      %zu of %zux%zu\n", spec.kernels.size(), spec.kernels[0].rows(),
              spec.kernels[0].cols());
  std::printf("feature map  %zux%zu per filter\n", out.rows, out.cols);
  std::printf("Toeplitz     %zux%zu per filter\n", out.rows * out.cols,
              spec.input.rows * spec.input.cols);
  std::printf("dense layer  W %zux%zu, b %zu (filters concatenated column-wise)\n",
              layer.weights().rows(), layer.weights().cols(), layer.bias().size());
  std::printf("written      %s\n", opt.out_path.c_str());
  if (opt.print_matrices) {
    for (std::size_t i = 0; i < spec.kernels.size(); ++i) {
      std::printf("\nTeop(K%zu):\n", i + 1);
      write_matrix(std::cout, toeplitz_of_kernel(spec.kernels[i], spec.input));
    }
  }
  return 0;
}

int run_eval(const std::string& model_path, const std::vector<std::string>& data,
             const std::string& config_path, std::optional<std::size_t> limit) {
  const Network network = load_model_file(model_path);
  Dataset dataset;
  if (!config_path.empty()) {
    const TrainConfig config = load_train_config(config_path);
    dataset = load_dataset(config.dataset, network.shape());
  } else if (data.size() == 2) {
    dataset = load_idx(data[0], data[1], limit);
  } else {
    throw Error("eval needs --data <images> <labels> or --config <file>");
  }
  if (dataset.feature_dim() != network.input_dim() ||
      dataset.target_dim() != network.output_dim()) {
    throw DimensionError("eval: data dimensions do not match the model");
  }
  const Evaluation e = evaluate(network, dataset);
  nlohmann::json out = {{"samples", dataset.size()}, {"mean_loss", e.mean_loss}};
  out["accuracy"] = e.accuracy ? nlohmann::json(*e.accuracy) : nullptr;
  std::cout << out.dump() << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jacobian-product backpropagation toolkit"};
  app.require_subcommand(1);

  GradcheckOptions gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Oracle-triangle gradient check on a random network");
  gradcheck->add_option("--seed", gc.seed, "PRNG seed")->capture_default_str();
  gradcheck->add_option("--layers", gc.layers, "Widths including input, e.g. 4,5,3")->capture_default_str();
  gradcheck->add_option("--head", gc.head, "sigmoid_bce | softmax_ce | identity_se")->capture_default_str();
  gradcheck->add_option("--activation", gc.activation, "Hidden activation(s): relu | sigmoid | identity")
      ->capture_default_str();
  gradcheck->add_option("--tol", gc.tol, "Finite-difference relative tolerance")->capture_default_str();
  gradcheck->add_option("--reference-tol", gc.reference_tol, "Structured vs dense tolerance")
      ->capture_default_str();
  gradcheck->add_option("--samples", gc.samples, "Number of random samples")->capture_default_str();
  gradcheck->add_option("--log", gc.log_path, "Write one JSON record per sample to this file");

  std::string config_path;
  auto* train = app.add_subcommand("train", "Train with SGD from a JSON config");
  train->add_option("--config", config_path, "Config file")->required();

  LowerOptions lo;
  auto* lower = app.add_subcommand("lower-conv", "Lower a convolution layer to a dense layer");
  lower->add_option("--input-shape", lo.input_shape, "Input image shape HxW")->required();
  lower->add_option("--kernel", lo.kernel_path, "Kernel matrices (text)")->required();
  lower->add_option("--bias", lo.bias_path, "Bias matrices (text), one per kernel");
  lower->add_option("--out", lo.out_path, "Model container to write")->required();
  lower->add_flag("--print", lo.print_matrices, "Also print each Toeplitz matrix");

  std::string model_path;
  std::vector<std::string> data_paths;
  std::string eval_config;
  std::optional<std::size_t> limit;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model");
  eval->add_option("--model", model_path, "Model container")->required();
  eval->add_option("--data", data_paths, "IDX images and labels files")->expected(2);
  eval->add_option("--config", eval_config, "Use the dataset section of a training config");
  eval->add_option("--limit", limit, "Use only the first N samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gradcheck) return run_gradcheck(gc);
    if (*train) return run_train(config_path);
    if (*lower) return run_lower_conv(lo);
    if (*eval) return run_eval(model_path, data_paths, eval_config, limit);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
