#pragma once

#include <map>
#include <string>
#include <vector>

#include "lpnet/network.hpp"

namespace lpnet {

/// The 3-conv digit classifier (28x28 grayscale in, `classes` logits out):
///   conv 1>8 3x3, AF, pool2, conv 8>16 3x3, AF, pool2, conv 16>32 3x3, AF,
///   flatten(288), linear(288,classes)
/// With the bottleneck enabled the last step becomes linear(288,2) followed
/// directly by a bias-free linear(2,classes) with no activation between, so
/// class regions in the 2-D feature plane are exact wedges around the origin
/// and boundaries are rays.
inline Network make_fig8(const ActivationSpec& af, bool fc2_bottleneck, Rng& rng,
                         std::size_t classes = 10) {
    Network net;
    net.emplace<Conv2d>(1, 8, 3, rng);
    net.emplace<ActivationLayer>(af);
    net.emplace<MaxPool2d>(2, 2);
    net.emplace<Conv2d>(8, 16, 3, rng);
    net.emplace<ActivationLayer>(af);
    net.emplace<MaxPool2d>(2, 2);
    net.emplace<Conv2d>(16, 32, 3, rng);
    net.emplace<ActivationLayer>(af);
    net.emplace<Flatten>();
    if (fc2_bottleneck) {
        net.emplace<Linear>(288, 2, rng);
        net.emplace<Linear>(2, classes, rng, /*bias=*/false);
    } else {
        net.emplace<Linear>(288, classes, rng);
    }
    return net;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::map<std::string, std::string> parse_fields(const std::string& s) {
    std::map<std::string, std::string> out;
    for (const std::string& field : split(s, ',')) {
        if (field.empty()) continue;
        const std::size_t eq = field.find('=');
        check(eq != std::string::npos, ErrorKind::data,
              "malformed layer field '" + field + "'");
        out[field.substr(0, eq)] = field.substr(eq + 1);
    }
    return out;
}

inline std::size_t field_size(const std::map<std::string, std::string>& f,
                              const std::string& key, const std::string& layer) {
    const auto it = f.find(key);
    check(it != f.end(), ErrorKind::data, layer + ": missing field '" + key + "'");
    return static_cast<std::size_t>(std::stoull(it->second));
}

} // namespace detail

/// Rebuilds a network from a Network::describe() string. Weights are
/// freshly initialised; checkpoint loading overwrites them.
inline Network network_from_arch(const std::string& arch, Rng& rng) {
    check(!arch.empty(), ErrorKind::data, "empty architecture string");
    Network net;
    for (const std::string& token : detail::split(arch, ';')) {
        const std::size_t colon = token.find(':');
        const std::string kind = token.substr(0, colon);
        const std::string rest = colon == std::string::npos ? "" : token.substr(colon + 1);
        if (kind == "conv2d") {
            const auto f = detail::parse_fields(rest);
            net.emplace<Conv2d>(detail::field_size(f, "in", kind),
                                detail::field_size(f, "out", kind),
                                detail::field_size(f, "k", kind), rng,
                                detail::field_size(f, "stride", kind),
                                detail::field_size(f, "pad", kind));
        } else if (kind == "maxpool2d") {
            const auto f = detail::parse_fields(rest);
            net.emplace<MaxPool2d>(detail::field_size(f, "k", kind),
                                   detail::field_size(f, "stride", kind));
        } else if (kind == "linear") {
            const auto f = detail::parse_fields(rest);
            const auto bias = f.find("bias");
            net.emplace<Linear>(detail::field_size(f, "in", kind),
                                detail::field_size(f, "out", kind), rng,
                                bias == f.end() || bias->second != "0");
        } else if (kind == "activation") {
            net.emplace<ActivationLayer>(af_spec_from_text(rest));
        } else if (kind == "flatten") {
            net.emplace<Flatten>();
        } else {
            throw Error(ErrorKind::data, "unknown layer kind '" + kind + "' in architecture");
        }
    }
    return net;
}

} // namespace lpnet
