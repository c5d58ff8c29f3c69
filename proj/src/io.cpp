#include "dinof/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dinof {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_samples_csv(const std::string& path, const Tensor& samples) {
    if (samples.rank() != 2) throw std::invalid_argument("samples csv: expected [n,d] tensor");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    const int64_t n = samples.shape[0], d = samples.shape[1];
    for (int64_t j = 0; j < d; ++j) f << (j ? ",x" : "x") << j;
    f << "\n";
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < d; ++j) {
            if (j) f << ",";
            f << format_g17(samples.at(i, j));
        }
        f << "\n";
    }
}

Tensor read_samples_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw DataError("'" + path + "': missing header", 1);
    int64_t d = 1;
    for (char c : line)
        if (c == ',') ++d;

    std::vector<double> values;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int64_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t pos = 0;
                values.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument("");
            } catch (...) {
                throw DataError("'" + path + "': malformed value '" + cell + "' at line " +
                                    std::to_string(line_no),
                                line_no);
            }
            ++cols;
        }
        if (cols != d)
            throw DataError("'" + path + "': expected " + std::to_string(d) + " columns, got " +
                                std::to_string(cols) + " at line " + std::to_string(line_no),
                            line_no);
    }
    const auto n = static_cast<int64_t>(values.size()) / d;
    Tensor out({n, d});
    out.data = std::move(values);
    return out;
}

void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "iter,score_loss,flow_nll,wall_ms\n";
    for (const LossRow& r : rows)
        f << r.iter << "," << format_g17(r.score_loss) << "," << format_g17(r.flow_nll) << ","
          << format_g17(r.wall_ms) << "\n";
}

void write_scatter_svg(const std::string& path, const Tensor& samples, double range) {
    if (samples.rank() != 2 || samples.shape[1] != 2)
        throw std::invalid_argument("scatter svg: expected [n,2] tensor");
    if (!(range > 0.0)) throw std::invalid_argument("scatter svg: range must be positive");
    const int W = 640, margin = 20;
    const double scale = static_cast<double>(W - 2 * margin) / (2.0 * range);
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W
      << "\" viewBox=\"0 0 " << W << " " << W << "\">\n";
    f << "<rect width=\"" << W << "\" height=\"" << W << "\" fill=\"white\"/>\n";
    f << "<line x1=\"" << W / 2 << "\" y1=\"0\" x2=\"" << W / 2 << "\" y2=\"" << W
      << "\" stroke=\"#dddddd\"/>\n";
    f << "<line x1=\"0\" y1=\"" << W / 2 << "\" x2=\"" << W << "\" y2=\"" << W / 2
      << "\" stroke=\"#dddddd\"/>\n";
    char buf[96];
    for (int64_t i = 0; i < samples.shape[0]; ++i) {
        const double px = margin + (samples.at(i, 0) + range) * scale;
        const double py = W - margin - (samples.at(i, 1) + range) * scale;
        if (px < 0 || px > W || py < 0 || py > W) continue;
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#4682b4\" "
                      "fill-opacity=\"0.5\"/>\n",
                      px, py);
        f << buf;
    }
    f << "</svg>\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace dinof
