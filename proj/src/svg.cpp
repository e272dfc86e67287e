#include "iotsentry/svg.hpp"

#include <cstdio>
#include <sstream>

namespace iotsentry {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr double kPlot = 400.0;
constexpr double kMargin = 50.0;

std::string polyline(const RocCurve& c, const char* style) {
    std::ostringstream out;
    out << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& p : c.points)
        out << num(kMargin + p.fpr * kPlot) << ',' << num(kMargin + (1.0 - p.tpr) * kPlot) << ' ';
    out << "\"/>\n";
    return out.str();
}

}  // namespace

std::string roc_svg(const std::string& title, const std::vector<RocCurve>& per_class, const RocCurve& macro,
                    const RocCurve& micro) {
    const double size = kPlot + 2 * kMargin;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size + 160) << "\" height=\"" << num(size)
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kMargin) << "\" y=\"30\" font-size=\"15\">" << escape(title) << "</text>\n";
    out << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(kPlot) << "\" height=\""
        << num(kPlot) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(kMargin + kPlot) << "\" x2=\"" << num(kMargin + kPlot)
        << "\" y2=\"" << num(kMargin) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = t / 4.0;
        out << "<text x=\"" << num(kMargin + v * kPlot - 8) << "\" y=\"" << num(kMargin + kPlot + 16) << "\">"
            << num(v) << "</text>\n";
        out << "<text x=\"" << num(kMargin - 34) << "\" y=\"" << num(kMargin + (1 - v) * kPlot + 4) << "\">"
            << num(v) << "</text>\n";
    }
    out << "<text x=\"" << num(kMargin + kPlot / 2 - 50) << "\" y=\"" << num(size - 8)
        << "\">False positive rate</text>\n";
    out << "<text transform=\"translate(12," << num(kMargin + kPlot / 2 + 45) << ") rotate(-90)\">True positive rate</text>\n";

    for (const auto& c : per_class) out << polyline(c, "stroke=\"steelblue\" stroke-opacity=\"0.25\"");
    if (!micro.points.empty()) out << polyline(micro, "stroke=\"darkorange\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"");
    if (!macro.points.empty()) out << polyline(macro, "stroke=\"navy\" stroke-width=\"2.5\"");

    const double lx = kMargin + kPlot + 15;
    out << "<text x=\"" << num(lx) << "\" y=\"" << num(kMargin + 10) << "\" fill=\"navy\">macro AUC "
        << num(macro.auc) << "</text>\n";
    out << "<text x=\"" << num(lx) << "\" y=\"" << num(kMargin + 28) << "\" fill=\"darkorange\">micro AUC "
        << num(micro.auc) << "</text>\n";
    out << "<text x=\"" << num(lx) << "\" y=\"" << num(kMargin + 46) << "\" fill=\"steelblue\">per class ("
        << per_class.size() << ")</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string confusion_svg(const std::string& title, const ConfusionMatrix& cm) {
    const auto k = cm.classes();
    const auto norm = cm.normalized();
    const double cell = k > 0 ? std::min(40.0, 600.0 / static_cast<double>(k)) : 40.0;
    const double left = 60.0;
    const double top = 60.0;
    const double grid = cell * static_cast<double>(k);
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(left + grid + 40) << "\" height=\""
        << num(top + grid + 50) << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(left) << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t p = 0; p < k; ++p) {
            const double v = norm(t, p);
            out << "<rect x=\"" << num(left + cell * static_cast<double>(p)) << "\" y=\""
                << num(top + cell * static_cast<double>(t)) << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
                << "\" fill=\"navy\" fill-opacity=\"" << num(v) << "\" stroke=\"#ddd\"><title>"
                << escape(cm.class_names[t]) << " -> " << escape(cm.class_names[p]) << ": " << num(v)
                << "</title></rect>\n";
        }
        out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + cell * (static_cast<double>(t) + 0.6))
            << "\" text-anchor=\"end\">" << t << "</text>\n";
        out << "<text x=\"" << num(left + cell * (static_cast<double>(t) + 0.5)) << "\" y=\"" << num(top - 6)
            << "\" text-anchor=\"middle\">" << t << "</text>\n";
    }
    out << "<text x=\"" << num(left + grid / 2 - 30) << "\" y=\"" << num(top + grid + 20)
        << "\" font-size=\"12\">Predicted class</text>\n";
    out << "<text transform=\"translate(14," << num(top + grid / 2 + 30) << ") rotate(-90)\" font-size=\"12\">True class</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace iotsentry
