#ifndef WTS_HELPERS_H
#define WTS_HELPERS_H

#include <systemc.h>
#include <cmath>
#include <utility>
#include <vector>

// Variable with a time-stamped history; at(r) is the left limit of its
// value at now - r, and the initial value before time 0.
class Tracked {
public:
    Tracked() : hist_{{0.0, 0.0}} {}
    Tracked(const Tracked& o) = default;
    Tracked& operator=(double v) {
        hist_.push_back({sc_time_stamp().to_seconds(), v});
        return *this;
    }
    Tracked& operator=(const Tracked& o) { return *this = double(o); }
    operator double() const { return hist_.back().second; }
    double at(double r) const {
        const double tol = 1e-13;
        double t = sc_time_stamp().to_seconds() - r;
        double v = hist_.front().second;
        for (const auto& h : hist_) {
            bool before = t > tol ? h.first < t - tol : h.first <= tol;
            if (!before) break;
            v = h.second;
        }
        return v;
    }
private:
    std::vector<std::pair<double, double>> hist_;
};

// Boolean signal seen through a flag table entry.
class SigRef {
public:
    void bind(sc_signal<bool>& s) { sig_ = &s; }
    SigRef& operator=(bool v) { sig_->write(v); return *this; }
    operator bool() const { return sig_->read(); }
    const sc_event& posedge_event() const { return sig_->posedge_event(); }
private:
    sc_signal<bool>* sig_ = nullptr;
};

inline bool N_2() {
    return true;
}

inline bool N_p_2() {
    return true;
}

inline double f_2(double d, double d_r) {
    return 2 - 3.14 * pow(0.18, 2) * sqrt(9.8 * (d + d_r));
}

inline bool N_3() {
    return true;
}

inline bool N_p_3() {
    return true;
}

inline double f_3(double d, double d_r) {
    return -(3.14 * pow(0.18, 2) * sqrt(9.8 * (d + d_r)));
}

#endif
