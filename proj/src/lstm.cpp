#include "aopath/lstm.hpp"

#include <cmath>

#include "autodiff_internal.hpp"

namespace aopath {

using detail::Node;

namespace {

// Reverse pass of one fused cell. n.value = [h; c], n.grad = [dh; dc],
// gates holds the activated [i, f, g, o] from the forward pass, parents
// are {x, h_prev, c_prev, w_ih, w_hh, b_ih, b_hh}.
void cell_backward(Node& n, std::size_t hid, std::size_t in, const std::vector<double>& gates) {
    Node& xn = *n.parents[0];
    Node& hn = *n.parents[1];
    Node& cn = *n.parents[2];
    Node& win = *n.parents[3];
    Node& whn = *n.parents[4];
    Node& bin = *n.parents[5];
    Node& bhn = *n.parents[6];

    std::vector<double> dpre(4 * hid);  // gate pre-activation gradients
    for (std::size_t j = 0; j < hid; ++j) {
        const double i = gates[j];
        const double f = gates[hid + j];
        const double g = gates[2 * hid + j];
        const double o = gates[3 * hid + j];
        const double tc = std::tanh(n.value[hid + j]);
        const double dh = n.grad[j];
        const double dc = n.grad[hid + j] + dh * o * (1.0 - tc * tc);

        dpre[j] = dc * g * i * (1.0 - i);
        dpre[hid + j] = dc * cn.value[j] * f * (1.0 - f);
        dpre[2 * hid + j] = dc * i * (1.0 - g * g);
        dpre[3 * hid + j] = dh * tc * o * (1.0 - o);
        if (cn.requires_grad) {
            cn.ensure_grad();
            cn.grad[j] += dc * f;
        }
    }

    if (bin.requires_grad) {
        bin.ensure_grad();
        for (std::size_t r = 0; r < 4 * hid; ++r) bin.grad[r] += dpre[r];
    }
    if (bhn.requires_grad) {
        bhn.ensure_grad();
        for (std::size_t r = 0; r < 4 * hid; ++r) bhn.grad[r] += dpre[r];
    }
    if (win.requires_grad) {
        win.ensure_grad();
        for (std::size_t r = 0; r < 4 * hid; ++r) {
            const double g = dpre[r];
            if (g == 0.0) continue;
            double* dst = &win.grad.data[r * in];
            for (std::size_t k = 0; k < in; ++k) dst[k] += g * xn.value[k];
        }
    }
    if (whn.requires_grad) {
        whn.ensure_grad();
        for (std::size_t r = 0; r < 4 * hid; ++r) {
            const double g = dpre[r];
            if (g == 0.0) continue;
            double* dst = &whn.grad.data[r * hid];
            for (std::size_t k = 0; k < hid; ++k) dst[k] += g * hn.value[k];
        }
    }
    if (xn.requires_grad) {
        xn.ensure_grad();
        for (std::size_t r = 0; r < 4 * hid; ++r) {
            const double g = dpre[r];
            if (g == 0.0) continue;
            const double* wr = &win.value.data[r * in];
            for (std::size_t k = 0; k < in; ++k) xn.grad[k] += g * wr[k];
        }
    }
    if (hn.requires_grad) {
        hn.ensure_grad();
        for (std::size_t r = 0; r < 4 * hid; ++r) {
            const double g = dpre[r];
            if (g == 0.0) continue;
            const double* wr = &whn.value.data[r * hid];
            for (std::size_t k = 0; k < hid; ++k) hn.grad[k] += g * wr[k];
        }
    }
}

}  // namespace

// The cell is fused into a single tape node (value = [h; c]) with a
// hand-written backward; the composite affine/slice/sigmoid/mul build is
// ~13 nodes per step and its tape overhead dominates training time.
LstmState lstm_cell(const Var& x, const Var& h, const Var& c, const LstmCellParams& p) {
    const std::size_t hid = p.hidden_size();
    const Tensor& xv = x.value();
    const Tensor& hv = h.value();
    const Tensor& cv = c.value();
    const Tensor& wi = p.w_ih.value();
    const Tensor& wh = p.w_hh.value();
    const Tensor& bi = p.b_ih.value();
    const Tensor& bh = p.b_hh.value();
    if (wi.ndim() != 2 || wh.ndim() != 2 || wi.dim(0) != 4 * hid || bi.dim(0) != 4 * hid ||
        bh.dim(0) != 4 * hid || wi.dim(1) != xv.dim(0) || wh.dim(1) != hv.dim(0) ||
        hv.dim(0) != hid || cv.dim(0) != hid)
        throw DimensionError("lstm_cell: parameter shapes do not conform");

    const std::size_t in = xv.dim(0);

    // gate pre-activations, order [input, forget, cell, output]
    std::vector<double> pre(4 * hid);
    for (std::size_t r = 0; r < 4 * hid; ++r) {
        double acc = bi[r] + bh[r];
        const double* wir = &wi.data[r * in];
        for (std::size_t k = 0; k < in; ++k) acc += wir[k] * xv[k];
        const double* whr = &wh.data[r * hid];
        for (std::size_t k = 0; k < hid; ++k) acc += whr[k] * hv[k];
        pre[r] = acc;
    }

    // activated gates, kept alive for the backward closure
    auto gates = std::make_shared<std::vector<double>>(4 * hid);
    std::vector<double>& gt = *gates;
    for (std::size_t j = 0; j < hid; ++j) {
        gt[j] = 1.0 / (1.0 + std::exp(-pre[j]));
        gt[hid + j] = 1.0 / (1.0 + std::exp(-pre[hid + j]));
        gt[2 * hid + j] = std::tanh(pre[2 * hid + j]);
        gt[3 * hid + j] = 1.0 / (1.0 + std::exp(-pre[3 * hid + j]));
    }

    Tensor out({2 * hid});
    for (std::size_t j = 0; j < hid; ++j) {
        const double c2 = gt[hid + j] * cv[j] + gt[j] * gt[2 * hid + j];
        out[hid + j] = c2;
        out[j] = gt[3 * hid + j] * std::tanh(c2);
    }

    Var fused = make_op(std::move(out), {x, h, c, p.w_ih, p.w_hh, p.b_ih, p.b_hh},
                        [hid, in, gates = std::move(gates)](Node& n) {
                            cell_backward(n, hid, in, *gates);
                        });
    return {slice(fused, 0, hid), slice(fused, hid, hid)};
}

namespace {

// One whole directional pass fused into a single tape node whose value
// is the final hidden state; the closure runs truncated-nowhere BPTT.
// Parents: x_0..x_{T-1} (in processing order), w_ih, w_hh, b_ih, b_hh.
struct RunTrace {
    std::size_t hid = 0, in = 0, steps = 0;
    std::vector<double> gates;  // steps x 4hid, activated [i,f,g,o]
    std::vector<double> cells;  // steps x hid, post-step cell states
    std::vector<double> hides;  // steps x hid, post-step hidden states
};

void run_backward(Node& n, const RunTrace& tr) {
    const std::size_t hid = tr.hid, in = tr.in, T = tr.steps;
    Node& win = *n.parents[T];
    Node& whn = *n.parents[T + 1];
    Node& bin = *n.parents[T + 2];
    Node& bhn = *n.parents[T + 3];

    std::vector<double> dh(n.grad.data), dc(hid, 0.0), dpre(4 * hid), dh_prev(hid);
    const bool wants_w = win.requires_grad;
    const bool wants_h = whn.requires_grad;
    const bool wants_b = bin.requires_grad || bhn.requires_grad;
    if (wants_w) win.ensure_grad();
    if (wants_h) whn.ensure_grad();
    if (bin.requires_grad) bin.ensure_grad();
    if (bhn.requires_grad) bhn.ensure_grad();

    for (std::size_t t = T; t-- > 0;) {
        const double* gt = &tr.gates[t * 4 * hid];
        const double* ct = &tr.cells[t * hid];
        const double* c_prev = t ? &tr.cells[(t - 1) * hid] : nullptr;
        const double* h_prev = t ? &tr.hides[(t - 1) * hid] : nullptr;
        Node& xn = *n.parents[t];

        for (std::size_t j = 0; j < hid; ++j) {
            const double i = gt[j];
            const double f = gt[hid + j];
            const double g = gt[2 * hid + j];
            const double o = gt[3 * hid + j];
            const double tc = std::tanh(ct[j]);
            const double dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
            dpre[j] = dcj * g * i * (1.0 - i);
            dpre[hid + j] = dcj * (c_prev ? c_prev[j] : 0.0) * f * (1.0 - f);
            dpre[2 * hid + j] = dcj * i * (1.0 - g * g);
            dpre[3 * hid + j] = dh[j] * tc * o * (1.0 - o);
            dc[j] = dcj * f;  // carried to step t-1
        }
        if (wants_b) {
            for (std::size_t r = 0; r < 4 * hid; ++r) {
                if (bin.requires_grad) bin.grad[r] += dpre[r];
                if (bhn.requires_grad) bhn.grad[r] += dpre[r];
            }
        }
        if (wants_w) {
            for (std::size_t r = 0; r < 4 * hid; ++r) {
                const double g = dpre[r];
                if (g == 0.0) continue;
                double* dst = &win.grad.data[r * in];
                for (std::size_t k = 0; k < in; ++k) dst[k] += g * xn.value[k];
            }
        }
        if (wants_h && h_prev) {
            for (std::size_t r = 0; r < 4 * hid; ++r) {
                const double g = dpre[r];
                if (g == 0.0) continue;
                double* dst = &whn.grad.data[r * hid];
                for (std::size_t k = 0; k < hid; ++k) dst[k] += g * h_prev[k];
            }
        }
        if (xn.requires_grad) {
            xn.ensure_grad();
            for (std::size_t r = 0; r < 4 * hid; ++r) {
                const double g = dpre[r];
                if (g == 0.0) continue;
                const double* wr = &win.value.data[r * in];
                for (std::size_t k = 0; k < in; ++k) xn.grad[k] += g * wr[k];
            }
        }
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (std::size_t r = 0; r < 4 * hid; ++r) {
            const double g = dpre[r];
            if (g == 0.0) continue;
            const double* wr = &whn.value.data[r * hid];
            for (std::size_t k = 0; k < hid; ++k) dh_prev[k] += g * wr[k];
        }
        dh = dh_prev;
    }
}

Var lstm_run(std::span<const Var> xs, const LstmCellParams& p, bool reverse) {
    const std::size_t hid = p.hidden_size();
    const Tensor& wi = p.w_ih.value();
    const Tensor& wh = p.w_hh.value();
    const Tensor& bi = p.b_ih.value();
    const Tensor& bh = p.b_hh.value();
    const std::size_t in = wi.dim(1);
    const std::size_t T = xs.size();
    if (wi.dim(0) != 4 * hid || bi.dim(0) != 4 * hid || bh.dim(0) != 4 * hid ||
        wh.dim(1) != hid)
        throw DimensionError("bilstm: parameter shapes do not conform");

    auto trace = std::make_shared<RunTrace>();
    trace->hid = hid;
    trace->in = in;
    trace->steps = T;
    trace->gates.resize(T * 4 * hid);
    trace->cells.resize(T * hid);
    trace->hides.resize(T * hid);

    std::vector<double> pre(4 * hid);
    std::vector<Var> parents;
    parents.reserve(T + 4);
    for (std::size_t t = 0; t < T; ++t) {
        const Var& x = reverse ? xs[T - 1 - t] : xs[t];
        const Tensor& xv = x.value();
        if (xv.dim(0) != in) throw DimensionError("bilstm: input width mismatch");
        parents.push_back(x);

        const double* h_prev = t ? &trace->hides[(t - 1) * hid] : nullptr;
        const double* c_prev = t ? &trace->cells[(t - 1) * hid] : nullptr;
        for (std::size_t r = 0; r < 4 * hid; ++r) {
            double acc = bi[r] + bh[r];
            const double* wir = &wi.data[r * in];
            for (std::size_t k = 0; k < in; ++k) acc += wir[k] * xv[k];
            if (h_prev) {
                const double* whr = &wh.data[r * hid];
                for (std::size_t k = 0; k < hid; ++k) acc += whr[k] * h_prev[k];
            }
            pre[r] = acc;
        }
        double* gt = &trace->gates[t * 4 * hid];
        for (std::size_t j = 0; j < hid; ++j) {
            gt[j] = 1.0 / (1.0 + std::exp(-pre[j]));
            gt[hid + j] = 1.0 / (1.0 + std::exp(-pre[hid + j]));
            gt[2 * hid + j] = std::tanh(pre[2 * hid + j]);
            gt[3 * hid + j] = 1.0 / (1.0 + std::exp(-pre[3 * hid + j]));
        }
        for (std::size_t j = 0; j < hid; ++j) {
            const double c2 = gt[hid + j] * (c_prev ? c_prev[j] : 0.0) + gt[j] * gt[2 * hid + j];
            trace->cells[t * hid + j] = c2;
            trace->hides[t * hid + j] = gt[3 * hid + j] * std::tanh(c2);
        }
    }

    Tensor out({hid});
    std::copy_n(&trace->hides[(T - 1) * hid], hid, out.data.begin());
    parents.push_back(p.w_ih);
    parents.push_back(p.w_hh);
    parents.push_back(p.b_ih);
    parents.push_back(p.b_hh);
    return make_op(std::move(out), std::move(parents),
                   [trace = std::move(trace)](Node& n) { run_backward(n, *trace); });
}

}  // namespace

Var bilstm(std::span<const Var> seq, const LstmCellParams& fwd, const LstmCellParams& bwd) {
    if (seq.empty()) throw DataError("bilstm: empty sequence");
    return concat(lstm_run(seq, fwd, false), lstm_run(seq, bwd, true));
}

}  // namespace aopath
