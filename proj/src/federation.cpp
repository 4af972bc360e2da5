#include "d3fl/federation.hpp"

#include "d3fl/kernels.hpp"
#include "d3fl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace d3fl::fed {

namespace {

// Runs fn(0..n-1) on up to `jobs` threads. Failures are rethrown in index
// order, so concurrent execution reports the same client as a sequential one.
void for_each_index(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::clamp<std::size_t>(jobs, 1, n);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

eval::Metrics cohort_mean(const std::vector<eval::Metrics>& per_client) {
    eval::Metrics m;
    for (const auto& c : per_client) {
        m.mse += c.mse;
        m.rmse += c.rmse;
        m.mae += c.mae;
    }
    const double k = static_cast<double>(per_client.size());
    m.mse /= k;
    m.rmse /= k;
    m.mae /= k;
    return m;
}

void check_config(const FederationConfig& cfg) {
    if (cfg.rounds < 1) throw std::invalid_argument("federation: rounds must be >= 1");
    if (cfg.local_epochs < 1) throw std::invalid_argument("federation: local_epochs must be >= 1");
    if (cfg.hidden < 1 || cfg.lookback < 1 || cfg.horizon < 1 || cfg.batch < 1)
        throw std::invalid_argument("federation: model dimensions must be >= 1");
}

std::string shuffle_label(std::size_t round_index) {
    return "shuffle-round-" + std::to_string(round_index);
}

}  // namespace

std::vector<double> fedavg(const std::vector<Update>& updates) {
    if (updates.empty()) throw std::runtime_error("fedavg: no client updates");
    const std::size_t dim = updates.front().params.size();
    std::size_t total = 0;
    for (const auto& u : updates) {
        if (u.params.size() != dim)
            throw std::invalid_argument("fedavg: parameter length mismatch from client " +
                                        std::to_string(u.client_id));
        if (u.sample_count == 0)
            throw std::invalid_argument("fedavg: zero sample count from client " +
                                        std::to_string(u.client_id));
        total += u.sample_count;
    }

    std::vector<std::size_t> order(updates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return updates[a].client_id < updates[b].client_id;
    });

    // normalized-weight terms combined by a fixed pairwise tree over the
    // sorted order; both choices keep the sum order-independent bit for bit
    const std::function<std::vector<double>(std::size_t, std::size_t)> tree_sum =
        [&](std::size_t lo, std::size_t hi) -> std::vector<double> {
        if (hi - lo == 1) {
            const Update& u = updates[order[lo]];
            std::vector<double> term = u.params;
            const double w = static_cast<double>(u.sample_count) / static_cast<double>(total);
            kernels::scale(term.data(), w, term.size());
            return term;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        std::vector<double> left = tree_sum(lo, mid);
        const std::vector<double> right = tree_sum(mid, hi);
        kernels::add(right.data(), left.data(), left.size());
        return left;
    };
    return tree_sum(0, updates.size());
}

ClientHandle prepare_client(const TimeSeries& series, const detrend::DetrendTechnique& tech,
                            const FederationConfig& cfg) {
    validate_for_training(series, cfg.lookback, cfg.horizon);
    auto [d, state] = detrend::apply(series.values, tech);

    const std::size_t L = cfg.lookback, O = cfg.horizon;
    if (d.size() < L + O)
        throw std::length_error("client " + std::to_string(series.client_id) +
                                ": series too short after detrending");
    const std::size_t n_windows = d.size() - L - O + 1;
    const auto n_train =
        static_cast<std::size_t>(std::floor(cfg.train_frac * static_cast<double>(n_windows)));
    // every value any training window can see: d[0 .. n_train-1 + L + O - 1]
    const std::size_t visible = std::min(d.size(), n_train + L + O - 1);

    ClientHandle h;
    h.client_id = series.client_id;
    h.scaler = model::fit_scaler(d, visible);
    h.state = std::move(state);
    const auto scaled = model::apply_scaler(d, h.scaler);
    h.detrended = std::move(d);
    const auto ds = model::make_windows(scaled, L, O);
    std::tie(h.train, h.val) = model::chrono_split(ds, cfg.train_frac);
    return h;
}

std::vector<ClientHandle> prepare_clients(const std::vector<TimeSeries>& cohort,
                                          const detrend::DetrendTechnique& tech,
                                          const FederationConfig& cfg) {
    if (cohort.empty()) throw std::invalid_argument("federation: empty cohort");
    std::unordered_set<int> seen;
    std::vector<ClientHandle> clients;
    clients.reserve(cohort.size());
    for (const auto& series : cohort) {
        if (!seen.insert(series.client_id).second)
            throw std::invalid_argument("federation: duplicate client_id " +
                                        std::to_string(series.client_id));
        clients.push_back(prepare_client(series, tech, cfg));
    }
    return clients;
}

eval::Metrics evaluate(const model::ModelParams& p, const model::WindowedDataset& ds) {
    eval::MetricsAccumulator acc;
    model::ForwardTape tape;
    for (std::size_t w = 0; w < ds.size(); ++w) {
        model::forward(p, ds.input(w), ds.L, tape);
        acc.add(tape.pred.data(), ds.target(w), ds.O);
    }
    return acc.finalize();
}

RoundReport run_round(model::ModelParams& global, std::vector<ClientHandle>& clients,
                      const FederationConfig& cfg, std::size_t round_index) {
    if (clients.empty()) throw std::invalid_argument("run_round: no clients");
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<Update> updates(clients.size());
    for_each_index(clients.size(), cfg.jobs, [&](std::size_t i) {
        ClientHandle& c = clients[i];
        try {
            model::ModelParams local = global;
            model::AdamState opt(local.count());
            rng::RngStream shuffle(cfg.seed, shuffle_label(round_index));
            for (std::size_t e = 0; e < cfg.local_epochs; ++e)
                model::train_epoch(local, opt, c.train, cfg.batch, shuffle);
            updates[i] = Update{c.client_id, std::move(local.flat), c.train.size()};
        } catch (const std::exception& e) {
            throw std::runtime_error("client " + std::to_string(c.client_id) + ": " + e.what());
        }
    });

    global.flat = fedavg(updates);
    if (!kernels::all_finite(global.flat.data(), global.flat.size()))
        throw std::runtime_error("round " + std::to_string(round_index) +
                                 ": non-finite global model after aggregation");

    RoundReport rep;
    rep.round = round_index;
    rep.client_ids.reserve(clients.size());
    rep.per_client.reserve(clients.size());
    for (const auto& c : clients) {
        rep.client_ids.push_back(c.client_id);
        rep.per_client.push_back(evaluate(global, c.val));
    }
    rep.cohort = cohort_mean(rep.per_client);
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

RunResult run_federation(const std::vector<TimeSeries>& cohort,
                         const detrend::DetrendTechnique& tech, const FederationConfig& cfg) {
    check_config(cfg);
    RunResult res;
    res.clients = prepare_clients(cohort, tech, cfg);
    rng::RngStream init(cfg.seed, "model-init");
    res.final_params = model::init_params(cfg.hidden, 1, cfg.horizon, init);
    res.reports.reserve(cfg.rounds);
    for (std::size_t r = 1; r <= cfg.rounds; ++r)
        res.reports.push_back(run_round(res.final_params, res.clients, cfg, r));
    return res;
}

RunResult run_centralized(const std::vector<TimeSeries>& cohort,
                          const detrend::DetrendTechnique& tech, const FederationConfig& cfg) {
    check_config(cfg);
    RunResult res;
    res.clients = prepare_clients(cohort, tech, cfg);

    model::WindowedDataset all;
    all.L = cfg.lookback;
    all.O = cfg.horizon;
    for (const auto& c : res.clients) {
        all.inputs.insert(all.inputs.end(), c.train.inputs.begin(), c.train.inputs.end());
        all.targets.insert(all.targets.end(), c.train.targets.begin(), c.train.targets.end());
    }

    rng::RngStream init(cfg.seed, "model-init");
    res.final_params = model::init_params(cfg.hidden, 1, cfg.horizon, init);
    res.reports.reserve(cfg.rounds);
    for (std::size_t r = 1; r <= cfg.rounds; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        // a fresh optimizer per epoch mirrors the round protocol, keeping the
        // one-client federation and this baseline step-for-step identical
        model::AdamState opt(res.final_params.count());
        rng::RngStream shuffle(cfg.seed, shuffle_label(r));
        model::train_epoch(res.final_params, opt, all, cfg.batch, shuffle);
        if (!kernels::all_finite(res.final_params.flat.data(), res.final_params.flat.size()))
            throw std::runtime_error("epoch " + std::to_string(r) + ": non-finite model");

        RoundReport rep;
        rep.round = r;
        for (const auto& c : res.clients) {
            rep.client_ids.push_back(c.client_id);
            rep.per_client.push_back(evaluate(res.final_params, c.val));
        }
        rep.cohort = cohort_mean(rep.per_client);
        rep.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.reports.push_back(std::move(rep));
    }
    return res;
}

void write_rounds_csv(const std::vector<RoundReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "round,client_id,mse,rmse,mae\n";
    for (const auto& rep : reports) {
        for (std::size_t i = 0; i < rep.per_client.size(); ++i) {
            const auto& m = rep.per_client[i];
            out << rep.round << ',' << rep.client_ids[i] << ',' << format_value(m.mse) << ','
                << format_value(m.rmse) << ',' << format_value(m.mae) << '\n';
        }
        out << rep.round << ",cohort," << format_value(rep.cohort.mse) << ','
            << format_value(rep.cohort.rmse) << ',' << format_value(rep.cohort.mae) << '\n';
    }
    if (!out.flush()) throw std::runtime_error("failed writing " + path);
}

}  // namespace d3fl::fed
