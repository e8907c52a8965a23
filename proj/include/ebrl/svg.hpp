#pragma once

#include <string>
#include <vector>

namespace ebrl {

// Minimal static SVG writer for the plot command; no display server needed.
class SvgCanvas {
public:
    SvgCanvas(int width, int height);

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double stroke_width = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double stroke_width = 1.5);
    void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
                 double opacity);
    void rect(double x, double y, double w, double h, const std::string& fill);
    void text(double x, double y, const std::string& s, int font_size = 11,
              const std::string& anchor = "start");

    std::string finish() const;

    int width() const { return width_; }
    int height() const { return height_; }

private:
    int width_, height_;
    std::string body_;
};

// Maps data coordinates into a pixel viewport with a small margin.
struct PlotScale {
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    double px = 0, py = 0, pw = 1, ph = 1;

    double x(double v) const { return px + (v - x_min) / (x_max - x_min) * pw; }
    double y(double v) const { return py + ph - (v - y_min) / (y_max - y_min) * ph; }
};

const std::vector<std::string>& plot_palette();

}  // namespace ebrl
