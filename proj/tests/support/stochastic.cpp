// SPDX-License-Identifier: Apache-2.0
#include "stochastic.hpp"

#include <orchestra/orchestrator.hpp>
#include <orchestra/scripted_backend.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace orchestra::testing
{

CoinBackend::CoinBackend(double p, std::string good, std::string bad):
    _p(p), _good(std::move(good)), _bad(std::move(bad))
{
}

bool CoinBackend::draw(std::int64_t seed) const
{
    auto engine = std::mt19937_64(static_cast<std::uint64_t>(seed) * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine) < _p;
}

ChatResponse CoinBackend::complete(const ChatRequest& request)
{
    if (!request.seed)
        throw std::logic_error("CoinBackend needs seeded requests");
    auto reply = "ANSWER: " + (draw(*request.seed) ? _good : _bad);
    auto response = ChatResponse {};
    response.content = reply;
    response.usage.input_tokens = synthetic_token_count(request.joined_content());
    response.usage.output_tokens = synthetic_token_count(reply);
    return response;
}

double majority_accuracy(int m, double p)
{
    auto binomial = [&](int k) {
        return std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0)) * std::pow(p, k)
               * std::pow(1.0 - p, m - k);
    };
    double total = 0.0;
    for (int k = 0; k <= m; ++k)
    {
        if (2 * k > m)
            total += binomial(k);
        else if (2 * k == m)
            total += binomial(k) * k / m; // sample 0 is correct in k of m equally likely positions
    }
    return total;
}

double simulate_accuracy(int m, double p, int trials, std::int64_t salt)
{
    auto backend = CoinBackend(p);
    auto task = TQATask {};
    task.id = "coin";
    task.table = Table("DF", {"x"}, {{"1"}});
    task.question = "coin?";
    auto resources = OrchestraResources {RoleBackends(backend), LlmSettings {}, ExemplarSet {}, ToolSettings {}};
    auto cfg = EpisodeConfig {};
    cfg.m_samples = m;
    int correct = 0;
    for (int t = 0; t < trials; ++t)
    {
        cfg.seed_base = salt + static_cast<std::int64_t>(t) * 16;
        if (run_orchestra(task, cfg, resources).answer.text == "A")
            ++correct;
    }
    return static_cast<double>(correct) / trials;
}

} // namespace orchestra::testing
