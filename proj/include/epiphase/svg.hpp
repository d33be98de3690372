#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "epiphase/errors.hpp"

namespace epiphase::svgplot {

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

// Append-only SVG document.  Only inline primitives, no external resources,
// so the files stand alone.
class Canvas {
  public:
    Canvas(double width, double height) : w_(width), h_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0, const std::string& dash = "") {
        body_ += "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" +
                 px(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) + "\"";
        if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
        body_ += "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.5) {
        if (pts.size() < 2) return;
        body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) +
                 "\" points=\"";
        for (const auto& [x, y] : pts) body_ += px(x) + "," + px(y) + " ";
        body_ += "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              double opacity = 1.0) {
        body_ += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) +
                 "\" height=\"" + px(h) + "\" fill=\"" + fill + "\"";
        if (opacity < 1.0) body_ += " fill-opacity=\"" + px(opacity) + "\"";
        body_ += "/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0) {
        body_ += "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" + px(r) +
                 "\" fill=\"" + fill + "\"";
        if (opacity < 1.0) body_ += " fill-opacity=\"" + px(opacity) + "\"";
        body_ += "/>\n";
    }

    void text(double x, double y, const std::string& s, double size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#333333",
              bool vertical = false) {
        body_ += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-size=\"" + px(size) +
                 "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\"";
        if (vertical)
            body_ += " transform=\"rotate(-90 " + px(x) + " " + px(y) + ")\"";
        body_ += ">" + esc(s) + "</text>\n";
    }

    std::string render() const {
        std::string head =
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
            px(w_) + "\" height=\"" + px(h_) + "\" viewBox=\"0 0 " + px(w_) + " " + px(h_) +
            "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
            "<rect x=\"0\" y=\"0\" width=\"" +
            px(w_) + "\" height=\"" + px(h_) + "\" fill=\"#ffffff\"/>\n";
        return head + body_ + "</svg>\n";
    }

  private:
    double w_, h_;
    std::string body_;
};

// Tick positions at a 1/2/5 * 10^k step covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
    if (!(hi > lo)) return {lo};
    double raw = (hi - lo) / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if ((hi - lo) / (m * mag) <= target) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    double t = std::ceil(lo / step) * step;
    for (; t <= hi + step * 1e-9; t += step) ticks.push_back(std::fabs(t) < step * 1e-9 ? 0.0 : t);
    return ticks;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// One data viewport: maps data coordinates into its pixel rectangle and
// draws its own frame, ticks and labels.
struct Axes {
    double left = 0, top = 0, width = 100, height = 100;  // pixel rect
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;                // data limits

    double X(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double Y(double y) const { return top + (y1 - y) / (y1 - y0) * height; }

    void frame(Canvas& c, const std::string& title = "", const std::string& xlabel = "",
               const std::string& ylabel = "") const {
        c.rect(left, top, width, height, "#fbfbfb");
        for (double t : nice_ticks(x0, x1)) {
            double xx = X(t);
            c.line(xx, top + height, xx, top + height + 4, "#666666", 1.0);
            c.text(xx, top + height + 16, tick_label(t), 10, "middle", "#555555");
        }
        for (double t : nice_ticks(y0, y1)) {
            double yy = Y(t);
            c.line(left - 4, yy, left, yy, "#666666", 1.0);
            c.text(left - 7, yy + 3.5, tick_label(t), 10, "end", "#555555");
            c.line(left, yy, left + width, yy, "#e8e8e8", 0.6);
        }
        c.line(left, top, left, top + height, "#444444", 1.0);
        c.line(left, top + height, left + width, top + height, "#444444", 1.0);
        if (!title.empty()) c.text(left + width / 2, top - 7, title, 12, "middle", "#222222");
        if (!xlabel.empty())
            c.text(left + width / 2, top + height + 32, xlabel, 11, "middle", "#333333");
        if (!ylabel.empty())
            c.text(left - 40, top + height / 2, ylabel, 11, "middle", "#333333", true);
    }
};

}  // namespace epiphase::svgplot
