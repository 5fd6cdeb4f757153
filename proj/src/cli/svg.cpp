#include "noisespec/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace noisespec::cli::svg {
namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (const char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

void header(std::ostringstream& o, const std::string& title)
{
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
}

struct Axes {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void frame(std::ostringstream& o, const Axes& a, const std::string& ylabel)
{
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
      << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = a.x0 + (a.x1 - a.x0) * k / 4.0, yv = a.y0 + (a.y1 - a.y0) * k / 4.0;
        o << "<text x=\"" << a.px(xv) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
          << num(xv) << "</text>\n";
        o << "<text x=\"" << kLeft - 6 << "\" y=\"" << a.py(yv) + 4 << "\" text-anchor=\"end\">" << ylabel
          << num(yv) << "</text>\n";
    }
}

void widen(double& lo, double& hi)
{
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

} // namespace

std::string line_chart(const std::string& title, const std::vector<Series>& series, bool log_y)
{
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    std::size_t n = 1;
    const auto tr = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
    for (const auto& s : series) {
        n = std::max(n, s.y.size());
        for (const double v : s.y) {
            if (!std::isfinite(tr(v))) continue;
            ymin = std::min(ymin, tr(v));
            ymax = std::max(ymax, tr(v));
        }
    }
    if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
    widen(ymin, ymax);
    double x0 = 1, x1 = static_cast<double>(n);
    widen(x0, x1);
    const Axes a{x0, x1, ymin, ymax};
    std::ostringstream o;
    header(o, title);
    frame(o, a, log_y ? "1e" : "");
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kColours[k % 5];
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.y.size(); ++i)
            if (std::isfinite(tr(s.y[i]))) o << num(a.px(static_cast<double>(i + 1))) << ',' << num(a.py(tr(s.y[i]))) << ' ';
        o << "\"/>\n";
        o << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 16 + 16 * static_cast<double>(k)
          << "\" text-anchor=\"end\" fill=\"" << colour << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string heatmap(const std::string& title, const std::vector<std::vector<double>>& cells)
{
    std::ostringstream o;
    header(o, title);
    const std::size_t n = cells.size();
    if (n == 0) {
        o << "</svg>\n";
        return o.str();
    }
    const double size = std::min(kWidth - kLeft - kRight, kHeight - kTop - kBottom) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cells[i].size(); ++j) {
            const double v = std::clamp(cells[i][j], 0.0, 1.0);
            const int shade = static_cast<int>(255 - 200 * v);
            const double x = kLeft + size * static_cast<double>(j), y = kTop + size * static_cast<double>(i);
            o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << size << "\" height=\"" << size
              << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"white\"/>\n";
            o << "<text x=\"" << x + size / 2 << "\" y=\"" << y + size / 2 + 4 << "\" text-anchor=\"middle\">"
              << num(cells[i][j]) << "</text>\n";
        }
    for (std::size_t k = 0; k < n; ++k) {
        o << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + size * (static_cast<double>(k) + 0.5) + 4
          << "\" text-anchor=\"end\">true " << k << "</text>\n";
        o << "<text x=\"" << kLeft + size * (static_cast<double>(k) + 0.5) << "\" y=\""
          << kTop + size * static_cast<double>(n) + 16 << "\" text-anchor=\"middle\">pred " << k << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string scatter(const std::string& title, const std::vector<double>& truth, const std::vector<double>& pred)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < truth.size() && i < pred.size(); ++i) {
        lo = std::min({lo, truth[i], pred[i]});
        hi = std::max({hi, truth[i], pred[i]});
    }
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    widen(lo, hi);
    const Axes a{lo, hi, lo, hi};
    std::ostringstream o;
    header(o, title);
    frame(o, a, "");
    o << "<line x1=\"" << a.px(lo) << "\" y1=\"" << a.py(lo) << "\" x2=\"" << a.px(hi) << "\" y2=\"" << a.py(hi)
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    for (std::size_t i = 0; i < truth.size() && i < pred.size(); ++i)
        o << "<circle cx=\"" << num(a.px(truth[i])) << "\" cy=\"" << num(a.py(pred[i]))
          << "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">true</text>\n";
    o << "</svg>\n";
    return o.str();
}

} // namespace noisespec::cli::svg
