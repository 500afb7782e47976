#include "pine/model_io.hpp"

#include <cstring>
#include <fstream>

#include "pine/graph.hpp"

namespace pine {

namespace {

constexpr char kModelMagic[] = {'P', 'I', 'N', 'E', 'M', '1'};

template <typename T>
void put(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in) throw GraphError(path.string() + ": truncated model file");
    return value;
}

template <typename Derived>
void put_blob(std::ofstream& out, const Eigen::PlainObjectBase<Derived>& m) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
}

template <typename Derived>
void get_blob(std::ifstream& in, Eigen::PlainObjectBase<Derived>& m, const std::filesystem::path& path) {
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
    if (!in) throw GraphError(path.string() + ": truncated parameter blob");
}

}  // namespace

void save_model(const gat::GatModel<float>& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw GraphError("cannot write " + path.string());
    out.write(kModelMagic, sizeof kModelMagic);
    put<std::uint64_t>(out, model.num_layers());
    put<float>(out, static_cast<float>(model.leaky_slope()));
    put<std::uint8_t>(out, model.activation() == gat::Activation::Elu ? 0 : 1);
    for (const auto& layer : model.layers()) {
        put<std::uint64_t>(out, layer.in_dim());
        put<std::uint64_t>(out, layer.out_dim());
    }
    for (const auto& layer : model.layers()) {
        put_blob(out, layer.projection);
        put_blob(out, layer.source_weight);
        put_blob(out, layer.target_weight);
    }
    if (!out) throw GraphError("failed writing " + path.string());
}

gat::GatModel<float> load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphError("cannot open " + path.string());
    char magic[sizeof kModelMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kModelMagic, sizeof magic) != 0)
        throw GraphError(path.string() + ": not a PINEM1 model file");
    const auto layers = get<std::uint64_t>(in, path);
    if (layers == 0 || layers > 1024) throw GraphError(path.string() + ": implausible layer count");
    gat::GatModel<float> model;
    model.set_leaky_slope(get<float>(in, path));
    const auto activation = get<std::uint8_t>(in, path);
    if (activation > 1) throw GraphError(path.string() + ": unknown activation code");
    model.set_activation(activation == 0 ? gat::Activation::Elu : gat::Activation::Identity);
    std::uint64_t previous_out = 0;
    for (std::uint64_t l = 0; l < layers; ++l) {
        const auto in_dim = get<std::uint64_t>(in, path);
        const auto out_dim = get<std::uint64_t>(in, path);
        if (in_dim == 0 || out_dim == 0 || (l > 0 && in_dim != previous_out))
            throw GraphError(path.string() + ": inconsistent layer dimensions");
        previous_out = out_dim;
        gat::Layer<float> layer;
        layer.projection.resize(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
        layer.source_weight.resize(static_cast<Eigen::Index>(out_dim));
        layer.target_weight.resize(static_cast<Eigen::Index>(out_dim));
        model.layers().push_back(std::move(layer));
    }
    for (auto& layer : model.layers()) {
        get_blob(in, layer.projection, path);
        get_blob(in, layer.source_weight, path);
        get_blob(in, layer.target_weight, path);
    }
    return model;
}

}  // namespace pine
