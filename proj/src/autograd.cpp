#include "spikegrid/autograd.hpp"

#include <cmath>

namespace spikegrid {

namespace {

Tensor slice_step(const Tensor& train, int t) {
    const std::int64_t n = train.size() / train.dim(0);
    Tensor out = Tensor::zeros({train.dim(1), train.dim(2), train.dim(3)});
    const float* src = &train.data[static_cast<std::size_t>(t) * n];
    std::copy(src, src + n, out.data.begin());
    return out;
}

// charged = rest + decay*(v - rest) + I. Spike mode thresholds and hard-resets;
// SmoothTwin substitutes a sigmoid for the step and blends the reset by it.
void apply_fire(Tensor& v, const Tensor& current, const LifConfig& cfg, FireMode mode, float alpha, Tensor& out,
                Tensor& h_save) {
    if (mode == FireMode::Spike) {
        lif_step_inplace(v, current, cfg, out, &h_save);
        return;
    }
    const float rest = cfg.v_rest, decay = cfg.decay, th = cfg.v_threshold;
    const std::size_t n = v.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const float charged = rest + decay * (v.data[i] - rest) + current.data[i];
        const float h = charged - th;
        const float s = 1.0f / (1.0f + std::exp(-alpha * h));
        h_save.data[i] = h;
        out.data[i] = s;
        v.data[i] = charged * (1.0f - s) + rest * s;
    }
}

Tensor apply_mixed_dw(const Tensor& input, const ParamStore& params, const std::vector<int>& group_param_ids) {
    const int c = input.dim(0);
    const int groups = static_cast<int>(group_param_ids.size());
    const int gsize = c / groups;
    Tensor out = Tensor::zeros(input.shape);
    for (int g = 0; g < groups; ++g)
        depthwise_conv2d_range(input, g * gsize, gsize, params.value(group_param_ids[static_cast<std::size_t>(g)]), out);
    return out;
}

Tensor apply_linear_accum(const Tensor& acc, const Tensor& w, const Tensor& x) {
    const int k = w.dim(0), features = w.dim(1);
    Tensor out = acc;
    for (int row = 0; row < k; ++row) {
        const float* wr = &w.data[static_cast<std::size_t>(row) * features];
        double s = 0.0;
        for (int f = 0; f < features; ++f) s += static_cast<double>(wr[f]) * static_cast<double>(x.data[static_cast<std::size_t>(f)]);
        out.data[static_cast<std::size_t>(row)] += static_cast<float>(s);
    }
    return out;
}

struct StepBuf {
    std::vector<Tensor> val;  // working tensor per time step
    std::vector<int> id;      // tape value id per time step (or -1)
};

}  // namespace

int Tape::lif_node_count() const {
    int n = 0;
    for (const auto& node : nodes)
        if (node.kind == OpKind::Lif) ++n;
    return n;
}

Tensor run_network(const Network& net, const Tensor& input_train, Tape* tape, const ForwardOptions& opts) {
    const auto& spec = net.spec();
    if (input_train.rank() != 4) throw ShapeError("run_network: input must be [T,C,H,W], got " + input_train.shape_str());
    if (input_train.dim(1) != spec.input_channels)
        throw ShapeError("run_network: expected " + std::to_string(spec.input_channels) + " input channels, got " +
                         std::to_string(input_train.dim(1)));
    const int t_steps = input_train.dim(0);
    int h = input_train.dim(2), w = input_train.dim(3);
    if (h != spec.patch_size || w != spec.patch_size)
        throw ShapeError("run_network: expected spatial size " + std::to_string(spec.patch_size));
    const ParamStore& params = net.params();

    StepBuf cur;
    cur.val.resize(static_cast<std::size_t>(t_steps));
    cur.id.assign(static_cast<std::size_t>(t_steps), -1);
    for (int t = 0; t < t_steps; ++t) {
        cur.val[static_cast<std::size_t>(t)] = slice_step(input_train, t);
        if (tape) cur.id[static_cast<std::size_t>(t)] = tape->add_val(cur.val[static_cast<std::size_t>(t)]);
    }

    int next_slot = 0;
    auto emit = [&](TapeNode&& node) {
        if (tape) tape->nodes.push_back(std::move(node));
    };
    auto store = [&](Tensor& v) -> int { return tape ? tape->add_val(v) : -1; };

    // Runs a conv over every step, replacing the working train.
    auto run_conv = [&](int weight_id) {
        const Tensor& kern = params.value(weight_id);
        for (int t = 0; t < t_steps; ++t) {
            Tensor out = conv2d(cur.val[static_cast<std::size_t>(t)], kern, 1, PaddingMode::Same);
            const int oid = store(out);
            emit({OpKind::Conv2d, t, cur.id[static_cast<std::size_t>(t)], -1, oid, weight_id});
            cur.val[static_cast<std::size_t>(t)] = std::move(out);
            cur.id[static_cast<std::size_t>(t)] = oid;
        }
    };

    // Runs a LIF population over the working train (currents -> spikes).
    auto run_fire = [&](const LifConfig& cfg, std::vector<int> channels_shape) {
        const int slot = next_slot++;
        if (tape) tape->num_state_slots = next_slot;
        Tensor v = Tensor::full(channels_shape, cfg.v_rest);
        for (int t = 0; t < t_steps; ++t) {
            Tensor spikes = Tensor::zeros(channels_shape);
            Tensor h_save = Tensor::zeros(channels_shape);
            apply_fire(v, cur.val[static_cast<std::size_t>(t)], cfg, opts.fire_mode, opts.twin_alpha, spikes, h_save);
            const int oid = store(spikes);
            TapeNode node{OpKind::Lif, t, cur.id[static_cast<std::size_t>(t)], -1, oid};
            node.state_slot = slot;
            node.saved = std::move(h_save);
            node.fire_mode = opts.fire_mode;
            node.twin_alpha = opts.twin_alpha;
            node.lif = cfg;
            emit(std::move(node));
            cur.val[static_cast<std::size_t>(t)] = std::move(spikes);
            cur.id[static_cast<std::size_t>(t)] = oid;
        }
    };

    for (const auto& layer : net.layers()) {
        if (const auto* sc = std::get_if<SConvDesc>(&layer)) {
            run_conv(sc->weight);
            run_fire(spec.lif, {sc->out_channels, h, w});

        } else if (const auto* sw = std::get_if<SwmrDesc>(&layer)) {
            // Keep the block input train for the shortcut and every branch.
            StepBuf xin = cur;
            std::vector<StepBuf> branch_current(sw->branches.size());
            for (std::size_t b = 0; b < sw->branches.size(); ++b) {
                const auto& br = sw->branches[b];
                cur = xin;
                for (int t = 0; t < t_steps; ++t) {
                    Tensor out = apply_mixed_dw(cur.val[static_cast<std::size_t>(t)], params, br.dw_weights);
                    const int oid = store(out);
                    TapeNode node{OpKind::MixedDepthwise, t, cur.id[static_cast<std::size_t>(t)], -1, oid};
                    node.group_param_ids = br.dw_weights;
                    emit(std::move(node));
                    cur.val[static_cast<std::size_t>(t)] = std::move(out);
                    cur.id[static_cast<std::size_t>(t)] = oid;
                }
                run_fire(spec.lif, {sw->channels, h, w});
                run_conv(br.pw_weight);
                branch_current[b] = cur;
            }
            // Merge: sum of branch currents plus v_threshold per input spike,
            // all fed to one LIF population.
            cur = branch_current[0];
            for (std::size_t b = 1; b < branch_current.size(); ++b) {
                for (int t = 0; t < t_steps; ++t) {
                    Tensor out = cur.val[static_cast<std::size_t>(t)];
                    out.add_(branch_current[b].val[static_cast<std::size_t>(t)]);
                    const int oid = store(out);
                    TapeNode node{OpKind::AddScaled, t, cur.id[static_cast<std::size_t>(t)],
                                  branch_current[b].id[static_cast<std::size_t>(t)], oid};
                    node.scale = 1.0f;
                    emit(std::move(node));
                    cur.val[static_cast<std::size_t>(t)] = std::move(out);
                    cur.id[static_cast<std::size_t>(t)] = oid;
                }
            }
            for (int t = 0; t < t_steps; ++t) {
                Tensor out = cur.val[static_cast<std::size_t>(t)];
                out.add_scaled_(xin.val[static_cast<std::size_t>(t)], spec.lif.v_threshold);
                const int oid = store(out);
                TapeNode node{OpKind::AddScaled, t, cur.id[static_cast<std::size_t>(t)], xin.id[static_cast<std::size_t>(t)], oid};
                node.scale = spec.lif.v_threshold;
                emit(std::move(node));
                cur.val[static_cast<std::size_t>(t)] = std::move(out);
                cur.id[static_cast<std::size_t>(t)] = oid;
            }
            run_fire(spec.lif, {sw->channels, h, w});

        } else if (const auto* p = std::get_if<PoolDesc>(&layer)) {
            const int nh = h / p->k, nw = w / p->k;
            for (int t = 0; t < t_steps; ++t) {
                PoolResult pr = max_pool2d(cur.val[static_cast<std::size_t>(t)], p->k);
                const int oid = store(pr.output);
                TapeNode node{OpKind::MaxPool, t, cur.id[static_cast<std::size_t>(t)], -1, oid};
                node.pool_k = p->k;
                node.argmax = std::move(pr.argmax);
                emit(std::move(node));
                cur.val[static_cast<std::size_t>(t)] = std::move(pr.output);
                cur.id[static_cast<std::size_t>(t)] = oid;
            }
            h = nh;
            w = nw;
        } else if (const auto* f = std::get_if<FcDesc>(&layer)) {
            if (cur.val[0].size() != f->features)
                throw ShapeError("run_network: readout expects " + std::to_string(f->features) + " features, got " +
                                 std::to_string(cur.val[0].size()));
            const Tensor& wfc = params.value(f->weight);
            Tensor acc = Tensor::zeros({spec.num_classes});
            int acc_id = tape ? tape->add_val(acc) : -1;
            for (int t = 0; t < t_steps; ++t) {
                Tensor out = apply_linear_accum(acc, wfc, cur.val[static_cast<std::size_t>(t)]);
                const int oid = store(out);
                emit({OpKind::LinearAccum, t, acc_id, cur.id[static_cast<std::size_t>(t)], oid, f->weight});
                acc = std::move(out);
                acc_id = oid;
            }
            Tensor logits = acc;
            logits.scale_(1.0f / static_cast<float>(t_steps));
            const int lid = store(logits);
            TapeNode node{OpKind::Scale, -1, acc_id, -1, lid};
            node.scale = 1.0f / static_cast<float>(t_steps);
            emit(std::move(node));
            if (tape) tape->logits_id = lid;
            return logits;
        }
    }
    throw ConfigError("run_network: network has no readout layer");
}

Tensor tape_replay(const Network& net, const Tape& tape) {
    const ParamStore& params = net.params();
    std::vector<Tensor> vals = tape.vals;
    std::vector<Tensor> states(static_cast<std::size_t>(tape.num_state_slots));
    for (const auto& node : tape.nodes) {
        switch (node.kind) {
            case OpKind::Conv2d:
                vals[static_cast<std::size_t>(node.out)] =
                    conv2d(vals[static_cast<std::size_t>(node.in_a)], params.value(node.param_id), 1, PaddingMode::Same);
                break;
            case OpKind::MixedDepthwise:
                vals[static_cast<std::size_t>(node.out)] =
                    apply_mixed_dw(vals[static_cast<std::size_t>(node.in_a)], params, node.group_param_ids);
                break;
            case OpKind::Lif: {
                Tensor& v = states[static_cast<std::size_t>(node.state_slot)];
                const Tensor& current = vals[static_cast<std::size_t>(node.in_a)];
                if (v.data.empty()) v = Tensor::full(current.shape, node.lif.v_rest);
                Tensor spikes = Tensor::zeros(current.shape);
                Tensor h_save = Tensor::zeros(current.shape);
                apply_fire(v, current, node.lif, node.fire_mode, node.twin_alpha, spikes, h_save);
                vals[static_cast<std::size_t>(node.out)] = std::move(spikes);
                break;
            }
            case OpKind::AddScaled: {
                Tensor out = vals[static_cast<std::size_t>(node.in_a)];
                out.add_scaled_(vals[static_cast<std::size_t>(node.in_b)], node.scale);
                vals[static_cast<std::size_t>(node.out)] = std::move(out);
                break;
            }
            case OpKind::MaxPool:
                vals[static_cast<std::size_t>(node.out)] = max_pool2d(vals[static_cast<std::size_t>(node.in_a)], node.pool_k).output;
                break;
            case OpKind::LinearAccum:
                vals[static_cast<std::size_t>(node.out)] = apply_linear_accum(
                    vals[static_cast<std::size_t>(node.in_a)], params.value(node.param_id), vals[static_cast<std::size_t>(node.in_b)]);
                break;
            case OpKind::Scale: {
                Tensor out = vals[static_cast<std::size_t>(node.in_a)];
                out.scale_(node.scale);
                vals[static_cast<std::size_t>(node.out)] = std::move(out);
                break;
            }
        }
    }
    return vals[static_cast<std::size_t>(tape.logits_id)];
}

GradientSet backward(const Tape& tape, const Network& net, const Tensor& d_logits, const SurrogateSpec& spec) {
    spec.validate();
    if (tape.logits_id < 0) throw ShapeError("backward: tape has no recorded logits");
    require_same_shape(d_logits, tape.vals[static_cast<std::size_t>(tape.logits_id)], "backward d_logits");

    const ParamStore& params = net.params();
    GradientSet pg = GradientSet::zeros_like(params);
    std::vector<Tensor> vg(tape.vals.size());
    std::vector<Tensor> carry(static_cast<std::size_t>(tape.num_state_slots));

    auto has = [&](int id) { return id >= 0 && !vg[static_cast<std::size_t>(id)].data.empty(); };
    auto accum = [&](int id, const Tensor& g, float scale) {
        Tensor& dst = vg[static_cast<std::size_t>(id)];
        if (dst.data.empty()) dst = Tensor::zeros(tape.vals[static_cast<std::size_t>(id)].shape);
        dst.add_scaled_(g, scale);
    };

    vg[static_cast<std::size_t>(tape.logits_id)] = d_logits;

    for (auto it = tape.nodes.rbegin(); it != tape.nodes.rend(); ++it) {
        const TapeNode& node = *it;
        switch (node.kind) {
            case OpKind::Scale: {
                if (!has(node.out)) break;
                accum(node.in_a, vg[static_cast<std::size_t>(node.out)], node.scale);
                break;
            }
            case OpKind::LinearAccum: {
                if (!has(node.out)) break;
                const Tensor& g = vg[static_cast<std::size_t>(node.out)];
                accum(node.in_a, g, 1.0f);
                const Tensor& w = params.value(node.param_id);
                const Tensor& x = tape.vals[static_cast<std::size_t>(node.in_b)];
                const int k = w.dim(0), features = w.dim(1);
                Tensor& gw = pg.grads[static_cast<std::size_t>(node.param_id)];
                for (int row = 0; row < k; ++row) {
                    const float gr = g.data[static_cast<std::size_t>(row)];
                    if (gr == 0.0f) continue;
                    float* dst = &gw.data[static_cast<std::size_t>(row) * features];
                    for (int f = 0; f < features; ++f) dst[f] += gr * x.data[static_cast<std::size_t>(f)];
                }
                Tensor gx = Tensor::zeros(x.shape);
                for (int row = 0; row < k; ++row) {
                    const float gr = g.data[static_cast<std::size_t>(row)];
                    if (gr == 0.0f) continue;
                    const float* wr = &w.data[static_cast<std::size_t>(row) * features];
                    for (int f = 0; f < features; ++f) gx.data[static_cast<std::size_t>(f)] += gr * wr[f];
                }
                accum(node.in_b, gx, 1.0f);
                break;
            }
            case OpKind::AddScaled: {
                if (!has(node.out)) break;
                const Tensor& g = vg[static_cast<std::size_t>(node.out)];
                accum(node.in_a, g, 1.0f);
                accum(node.in_b, g, node.scale);
                break;
            }
            case OpKind::MaxPool: {
                if (!has(node.out)) break;
                const Tensor& in = tape.vals[static_cast<std::size_t>(node.in_a)];
                Tensor gi = max_pool2d_backward(vg[static_cast<std::size_t>(node.out)], node.argmax, in.dim(0), in.dim(1), in.dim(2));
                accum(node.in_a, gi, 1.0f);
                break;
            }
            case OpKind::Lif: {
                const bool has_out = has(node.out);
                Tensor& cg = carry[static_cast<std::size_t>(node.state_slot)];
                const bool has_carry = !cg.data.empty();
                if (!has_out && !has_carry) break;
                const Tensor& spikes = tape.vals[static_cast<std::size_t>(node.out)];
                Tensor gh = Tensor::zeros(node.saved.shape);
                const std::size_t n = gh.data.size();
                const float* gs = has_out ? vg[static_cast<std::size_t>(node.out)].data.data() : nullptr;
                const float* gv = has_carry ? cg.data.data() : nullptr;
                if (node.fire_mode == FireMode::Spike) {
                    for (std::size_t i = 0; i < n; ++i) {
                        float g = 0.0f;
                        if (gs) g += gs[i] * surrogate_grad_scalar(node.saved.data[i], spec);
                        // Decay-path carry; the hard reset blocks the carry at
                        // spiking steps and is itself treated as constant.
                        if (gv) g += gv[i] * (1.0f - spikes.data[i]);
                        gh.data[i] = g;
                    }
                } else {
                    const float alpha = node.twin_alpha;
                    const float rest = node.lif.v_rest, th = node.lif.v_threshold;
                    for (std::size_t i = 0; i < n; ++i) {
                        const float s = spikes.data[i];
                        const float ds_dh = alpha * s * (1.0f - s);
                        const float charged = node.saved.data[i] + th;
                        float g = 0.0f;
                        if (gs) g += gs[i] * ds_dh;
                        if (gv) g += gv[i] * ((1.0f - s) + (rest - charged) * ds_dh);
                        gh.data[i] = g;
                    }
                }
                accum(node.in_a, gh, 1.0f);
                gh.scale_(node.lif.decay);
                cg = std::move(gh);
                break;
            }
            case OpKind::Conv2d: {
                if (!has(node.out)) break;
                const Tensor& g = vg[static_cast<std::size_t>(node.out)];
                const Tensor& in = tape.vals[static_cast<std::size_t>(node.in_a)];
                const Tensor& w = params.value(node.param_id);
                Tensor gi = conv2d_grad_input(g, w, in.dim(1), in.dim(2), PaddingMode::Same);
                accum(node.in_a, gi, 1.0f);
                pg.grads[static_cast<std::size_t>(node.param_id)].add_(conv2d_grad_kernels(g, in, w.dim(3), PaddingMode::Same));
                break;
            }
            case OpKind::MixedDepthwise: {
                if (!has(node.out)) break;
                const Tensor& g = vg[static_cast<std::size_t>(node.out)];
                const Tensor& in = tape.vals[static_cast<std::size_t>(node.in_a)];
                const int c = in.dim(0);
                const int groups = static_cast<int>(node.group_param_ids.size());
                const int gsize = c / groups;
                Tensor& gi = vg[static_cast<std::size_t>(node.in_a)];
                if (gi.data.empty()) gi = Tensor::zeros(in.shape);
                for (int grp = 0; grp < groups; ++grp) {
                    const int pid = node.group_param_ids[static_cast<std::size_t>(grp)];
                    const Tensor& kern = params.value(pid);
                    depthwise_range_grad_input(g, grp * gsize, gsize, kern, gi);
                    depthwise_range_grad_kernels(g, grp * gsize, gsize, in, kern.dim(2), pg.grads[static_cast<std::size_t>(pid)]);
                }
                break;
            }
        }
    }

    for (std::size_t i = 0; i < pg.grads.size(); ++i)
        if (!pg.grads[i].all_finite())
            throw NumericError("backward: non-finite gradient for parameter " + params.name(static_cast<int>(i)));
    return pg;
}

}  // namespace spikegrid
