#include "jacprop/convlower.hpp"

#include <string>

#include "jacprop/errors.hpp"

namespace jacprop {

namespace {

void require_fits(const DenseMatrix& kernel, ImageShape input) {
  if (kernel.empty() || input.rows == 0 || input.cols == 0) {
    throw DimensionError("convolution: empty kernel or input");
  }
  if (kernel.rows() > input.rows || kernel.cols() > input.cols) {
    throw DimensionError("convolution: kernel " + std::to_string(kernel.rows()) + "x" +
                         std::to_string(kernel.cols()) + " larger than input " +
                         std::to_string(input.rows) + "x" + std::to_string(input.cols));
  }
}

}  // namespace

DenseMatrix conv2d_direct(const DenseMatrix& x, const DenseMatrix& kernel) {
  require_fits(kernel, {x.rows(), x.cols()});
  const std::size_t out_rows = x.rows() - kernel.rows() + 1;
  const std::size_t out_cols = x.cols() - kernel.cols() + 1;
  DenseMatrix out(out_rows, out_cols);
  for (std::size_t i = 0; i < out_rows; ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < kernel.rows(); ++p) {
        for (std::size_t q = 0; q < kernel.cols(); ++q) acc += x(i + p, j + q) * kernel(p, q);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

DenseMatrix toeplitz_of_kernel(const DenseMatrix& kernel, ImageShape input) {
  require_fits(kernel, input);
  const std::size_t out_rows = input.rows - kernel.rows() + 1;
  const std::size_t out_cols = input.cols - kernel.cols() + 1;
  DenseMatrix teop(out_rows * out_cols, input.rows * input.cols);
  for (std::size_t i = 0; i < out_rows; ++i) {
    for (std::size_t j = 0; j < out_cols; ++j) {
      const std::size_t row = i * out_cols + j;
      for (std::size_t p = 0; p < kernel.rows(); ++p) {
        for (std::size_t q = 0; q < kernel.cols(); ++q) {
          teop(row, (i + p) * input.cols + (j + q)) = kernel(p, q);
        }
      }
    }
  }
  return teop;
}

ImageShape ConvSpec::output() const {
  if (kernels.empty()) return {0, 0};
  return {input.rows - kernels.front().rows() + 1, input.cols - kernels.front().cols() + 1};
}

void ConvSpec::validate() const {
  if (kernels.empty()) throw DimensionError("ConvSpec: no filters");
  for (const DenseMatrix& k : kernels) {
    require_fits(k, input);
    if (k.rows() != kernels.front().rows() || k.cols() != kernels.front().cols()) {
      throw DimensionError("ConvSpec: filters must share one kernel shape");
    }
  }
  if (!biases.empty() && biases.size() != kernels.size()) {
    throw DimensionError("ConvSpec: " + std::to_string(biases.size()) + " bias matrices for " +
                         std::to_string(kernels.size()) + " filters");
  }
  const ImageShape out = output();
  for (const DenseMatrix& b : biases) {
    if (b.rows() != out.rows || b.cols() != out.cols) {
      throw DimensionError("ConvSpec: bias must be " + std::to_string(out.rows) + "x" +
                           std::to_string(out.cols));
    }
  }
}

std::vector<LoweredFilter> conv_layer_to_dense(const ConvSpec& spec) {
  spec.validate();
  const ImageShape out = spec.output();
  std::vector<LoweredFilter> lowered;
  lowered.reserve(spec.kernels.size());
  for (std::size_t i = 0; i < spec.kernels.size(); ++i) {
    DenseVector bias = spec.biases.empty() ? DenseVector(out.rows * out.cols)
                                           : vec_rows(spec.biases[i]);
    lowered.push_back({transpose(toeplitz_of_kernel(spec.kernels[i], spec.input)), std::move(bias)});
  }
  return lowered;
}

DenseLayer lower_conv_layer(const ConvSpec& spec, std::optional<ActivationKind> activation) {
  const std::vector<LoweredFilter> filters = conv_layer_to_dense(spec);
  DenseMatrix weights;
  std::vector<double> bias;
  for (const LoweredFilter& f : filters) {
    weights = hcat(weights, f.weights);
    bias.insert(bias.end(), f.bias.begin(), f.bias.end());
  }
  return DenseLayer(std::move(weights), DenseVector(std::move(bias)), activation);
}

}  // namespace jacprop
