#include "dde/tableau.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dde {

void ButcherTableau::dense_weights(double theta, std::vector<double>& w) const {
    w.assign(stages, 0.0);
    for (std::size_t i = 0; i < stages; ++i) {
        const auto& coeffs = dense[i];
        double acc = 0.0;
        for (std::size_t p = coeffs.size(); p-- > 0;) acc = acc * theta + coeffs[p];
        w[i] = acc * theta;
    }
}

void ButcherTableau::dense_weights_derivative(double theta, std::vector<double>& w) const {
    w.assign(stages, 0.0);
    for (std::size_t i = 0; i < stages; ++i) {
        const auto& coeffs = dense[i];
        double acc = 0.0;
        for (std::size_t p = coeffs.size(); p-- > 0;) acc = acc * theta + static_cast<double>(p + 1) * coeffs[p];
        w[i] = acc;
    }
}

std::string check_tableau(const ButcherTableau& tab, double tol) {
    std::ostringstream msg;
    const std::size_t s = tab.stages;
    if (tab.a.size() != s || tab.b.size() != s || tab.b_hat.size() != s || tab.c.size() != s) {
        return "dimension mismatch";
    }
    for (std::size_t i = 0; i < s; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            if (j >= i && tab.a[i][j] != 0.0) {
                msg << "a[" << i << "][" << j << "] is not strictly lower triangular";
                return msg.str();
            }
            row += tab.a[i][j];
        }
        if (std::abs(row - tab.c[i]) > tol) {
            msg << "row sum " << i << " = " << row << " != c = " << tab.c[i];
            return msg.str();
        }
    }
    double sb = 0.0;
    double sbh = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
        sb += tab.b[j];
        sbh += tab.b_hat[j];
    }
    if (std::abs(sb - 1.0) > tol) return "sum of b != 1";
    if (std::abs(sbh - 1.0) > tol) return "sum of b_hat != 1";
    if (tab.has_dense()) {
        std::vector<double> w;
        tab.dense_weights(1.0, w);
        for (std::size_t j = 0; j < s; ++j) {
            if (std::abs(w[j] - tab.b[j]) > tol) {
                msg << "dense weight " << j << " at theta=1 is " << w[j] << ", expected " << tab.b[j];
                return msg.str();
            }
        }
    }
    if (tab.fsal) {
        if (std::abs(tab.c[s - 1] - 1.0) > tol) return "fsal stage not at c = 1";
        for (std::size_t j = 0; j < s; ++j) {
            if (std::abs(tab.a[s - 1][j] - tab.b[j]) > tol) return "fsal stage row differs from b";
        }
    }
    return {};
}

namespace {

ButcherTableau make_rk4() {
    ButcherTableau t;
    t.name = "rk4";
    t.stages = 4;
    t.a = {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}};
    t.b = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
    t.b_hat = t.b;
    t.c = {0, 0.5, 0.5, 1};
    t.order = 4;
    t.embedded_order = 4;
    return t;
}

ButcherTableau make_tsit5() {
    ButcherTableau t;
    t.name = "tsit5";
    t.stages = 7;
    t.c = {0.0, 0.161, 0.327, 0.9, 0.9800255409045097, 1.0, 1.0};
    t.a.assign(7, std::vector<double>(7, 0.0));
    t.a[1][0] = 0.161;
    t.a[2][0] = -0.008480655492356989;
    t.a[2][1] = 0.335480655492357;
    t.a[3][0] = 2.897153057105493;
    t.a[3][1] = -6.359448489975075;
    t.a[3][2] = 4.3622954328695815;
    t.a[4][0] = 5.325864828439257;
    t.a[4][1] = -11.748883564062828;
    t.a[4][2] = 7.4955393428898365;
    t.a[4][3] = -0.09249506636175525;
    t.a[5][0] = 5.86145544294642;
    t.a[5][1] = -12.92096931784711;
    t.a[5][2] = 8.159367898576159;
    t.a[5][3] = -0.071584973281401;
    t.a[5][4] = -0.028269050394068383;
    t.a[6][0] = 0.09646076681806523;
    t.a[6][1] = 0.01;
    t.a[6][2] = 0.4798896504144996;
    t.a[6][3] = 1.379008574103742;
    t.a[6][4] = -3.290069515436081;
    t.a[6][5] = 2.324710524099774;
    t.b = {t.a[6][0], t.a[6][1], t.a[6][2], t.a[6][3], t.a[6][4], t.a[6][5], 0.0};

    // b - b_hat
    const double btilde[7] = {-0.00178001105222577714, -0.0008164344596567469, 0.007880878010261995,
                              -0.1447110071732629,     0.5823571654525552,     -0.45808210592918697,
                              0.015151515151515152};
    t.b_hat.resize(7);
    for (int i = 0; i < 7; ++i) t.b_hat[i] = t.b[i] - btilde[i];

    t.order = 5;
    t.embedded_order = 4;
    t.has_embedded = true;
    t.fsal = true;

    // Coefficients of theta^1..theta^4.
    t.dense = {
        {1.0, -2.763706197274826, 2.9132554618219126, -1.0530884977290216},
        {0.0, 0.13169999999999998, -0.2234, 0.1017},
        {0.0, 3.9302962368947516, -5.941033872131505, 2.490627285651253},
        {0.0, -12.411077166933676, 30.33818863028232, -16.548102889244902},
        {0.0, 37.50931341651104, -88.1789048947664, 47.37952196281928},
        {0.0, -27.896526289197286, 65.09189467479366, -34.87065786149661},
        {0.0, 1.5, -4.0, 2.5},
    };
    return t;
}

const ButcherTableau& checked(const ButcherTableau& t) {
    const std::string err = check_tableau(t, 1e-13);
    if (!err.empty()) throw std::logic_error("inconsistent tableau " + t.name + ": " + err);
    return t;
}

}  // namespace

const ButcherTableau& rk4_tableau() {
    static const ButcherTableau tab = make_rk4();
    static const ButcherTableau& ok = checked(tab);
    return ok;
}

const ButcherTableau& tsit5_tableau() {
    static const ButcherTableau tab = make_tsit5();
    static const ButcherTableau& ok = checked(tab);
    return ok;
}

}  // namespace dde
