#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dinof/tensor.hpp"

namespace dinof {

struct DataError : std::runtime_error {
    DataError(std::string message, int line_no = 0)
        : std::runtime_error(std::move(message)), line(line_no) {}
    int line;
};

std::string format_g17(double v);  // 17 significant digits

// Samples CSV: header x0,...,x{d-1}; one row per sample.
void write_samples_csv(const std::string& path, const Tensor& samples);
Tensor read_samples_csv(const std::string& path);  // throws DataError naming the line

struct LossRow {
    int64_t iter;
    double score_loss;
    double flow_nll;
    double wall_ms;
};
void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows);

// 2-D scatter as a fixed 640x640 SVG; axis range is [-range, range] on both axes.
void write_scatter_svg(const std::string& path, const Tensor& samples, double range);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dinof
