#include "coachsim/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coachsim::plot {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

double nice_max(double v) {
    if (v <= 0.0) return 1.0;
    return v * 1.15;
}

void emit_frame(std::ostringstream& os, const std::string& title, double max_value) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"16\">" << title << "</text>\n";
    const int plot_h = kHeight - kMarginTop - kMarginBottom;
    for (int i = 0; i <= 4; ++i) {
        const double frac = i / 4.0;
        const double y = kMarginTop + plot_h * (1.0 - frac);
        os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kWidth - kMarginRight
           << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(y + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
           << fmt_tick(max_value * frac) << "</text>\n";
    }
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
    if (labels.size() != values.size()) throw std::invalid_argument("labels/values length mismatch");
    const double max_value = nice_max(*std::max_element(values.begin(), values.end()));
    std::ostringstream os;
    emit_frame(os, title, max_value);

    const int plot_w = kWidth - kMarginLeft - kMarginRight;
    const int plot_h = kHeight - kMarginTop - kMarginBottom;
    const double slot = static_cast<double>(plot_w) / static_cast<double>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double h = std::max(0.0, values[i] / max_value) * plot_h;
        const double x = kMarginLeft + slot * static_cast<double>(i) + slot * 0.15;
        const double y = kMarginTop + plot_h - h;
        os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(slot * 0.7)
           << "\" height=\"" << fmt(h) << "\" fill=\"" << kPalette[0] << "\"/>\n";
        os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << kHeight - kMarginBottom + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << labels[i]
           << "</text>\n";
        os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << fmt(y - 4)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt_tick(values[i])
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string grouped_bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                                  const std::vector<std::string>& series_names,
                                  const std::vector<std::vector<double>>& series_values) {
    if (series_names.size() != series_values.size()) {
        throw std::invalid_argument("series names/values length mismatch");
    }
    double max_value = 0.0;
    for (const auto& sv : series_values) {
        if (sv.size() != labels.size()) throw std::invalid_argument("series length mismatch");
        for (double v : sv) max_value = std::max(max_value, v);
    }
    max_value = nice_max(max_value);

    std::ostringstream os;
    emit_frame(os, title, max_value);
    const int plot_w = kWidth - kMarginLeft - kMarginRight;
    const int plot_h = kHeight - kMarginTop - kMarginBottom;
    const double slot = static_cast<double>(plot_w) / static_cast<double>(labels.size());
    const double bar_w = slot * 0.8 / static_cast<double>(series_names.size());

    for (std::size_t s = 0; s < series_names.size(); ++s) {
        const char* color = kPalette[s % 6];
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double h = std::max(0.0, series_values[s][i] / max_value) * plot_h;
            const double x = kMarginLeft + slot * static_cast<double>(i) + slot * 0.1 +
                             bar_w * static_cast<double>(s);
            const double y = kMarginTop + plot_h - h;
            os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(bar_w * 0.9)
               << "\" height=\"" << fmt(h) << "\" fill=\"" << color << "\"/>\n";
        }
        os << "<rect x=\"" << kMarginLeft + 10 + static_cast<int>(s) * 110 << "\" y=\"34\" width=\"10\" "
              "height=\"10\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << kMarginLeft + 24 + static_cast<int>(s) * 110
           << "\" y=\"43\" font-family=\"sans-serif\" font-size=\"11\">" << series_names[s]
           << "</text>\n";
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double x = kMarginLeft + slot * (static_cast<double>(i) + 0.5);
        os << "<text x=\"" << fmt(x) << "\" y=\"" << kHeight - kMarginBottom + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << labels[i]
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

namespace {

void write_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write chart to " + path);
    out << text;
}

}  // namespace

void write_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                     const std::vector<double>& values, const std::string& path) {
    write_file(bar_chart_svg(title, labels, values), path);
}

void write_grouped_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                             const std::vector<std::string>& series_names,
                             const std::vector<std::vector<double>>& series_values,
                             const std::string& path) {
    write_file(grouped_bar_chart_svg(title, labels, series_names, series_values), path);
}

}  // namespace coachsim::plot
