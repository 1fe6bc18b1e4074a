#include "idcwh/presets.hpp"

#include "idcwh/dataset.hpp"
#include "idcwh/errors.hpp"

namespace idcwh {

namespace {

Preset make_blobs10() {
    Preset p;
    p.name = "blobs10";
    p.kind = Preset::Kind::Gaussian;
    p.classes = 10;
    p.dim = 32;
    p.per_class = 100;
    p.spread = 0.5;
    p.separation = 8.0;
    p.data_seed = 9001;
    p.query_per_class = 0;  // self-retrieval over the train split
    p.train_per_class = 0;
    p.train_in_db = true;
    p.exclude_self = true;
    p.cfg.code_length = 16;
    p.cfg.epochs = 60;
    p.cfg.batch_size = 128;
    p.cfg.seed = 7;
    p.cfg.hidden_sizes = {64};
    p.cfg.lr_encoder = 1e-3;  // batch losses are summed, so rates scale down
    p.cfg.lr_centers = 5e-4;
    p.p_at_n_grid = {1, 5, 10, 20, 50, 100};
    return p;
}

Preset make_blobs100() {
    Preset p;
    p.name = "blobs100";
    p.kind = Preset::Kind::Gaussian;
    p.classes = 100;
    p.dim = 64;
    p.per_class = 50;
    p.spread = 0.8;
    p.separation = 8.0;
    p.data_seed = 9002;
    p.query_per_class = 10;
    p.train_per_class = 40;
    p.train_in_db = true;  // the train split doubles as the database
    p.exclude_self = false;
    p.cfg.code_length = 24;
    p.cfg.epochs = 50;
    p.cfg.batch_size = 128;
    p.cfg.seed = 1;
    p.cfg.hidden_sizes = {128};
    p.cfg.lr_encoder = 1e-3;
    p.cfg.lr_centers = 5e-4;
    // Inner-product theta: with small-norm center init the cosine form takes
    // huge early steps (its jacobian scales with 1/||mu||) and destabilizes.
    p.cfg.theta_mode = ThetaMode::Inner;
    p.p_at_n_grid = {1, 5, 10, 50, 100, 500, 1000};
    return p;
}

Preset make_multilabel20() {
    Preset p;
    p.name = "multilabel20";
    p.kind = Preset::Kind::Multilabel;
    p.classes = 20;
    p.dim = 48;
    p.samples = 3000;
    p.max_labels = 2;
    p.spread = 0.6;
    p.separation = 6.0;
    p.data_seed = 9003;
    p.query_per_class = 3;
    p.train_per_class = 20;
    p.train_in_db = false;
    p.exclude_self = false;
    p.cfg.code_length = 16;
    p.cfg.epochs = 40;
    p.cfg.batch_size = 128;
    p.cfg.seed = 1;
    p.cfg.hidden_sizes = {96};
    p.cfg.lr_encoder = 1e-3;
    p.cfg.lr_centers = 5e-4;
    p.p_at_n_grid = {1, 5, 10, 50, 100, 500, 1000};
    return p;
}

const std::vector<Preset>& registry() {
    static const std::vector<Preset> presets = {make_blobs10(), make_blobs100(),
                                                make_multilabel20()};
    return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const Preset& p : registry()) names.push_back(p.name);
    return names;
}

const Preset& get_preset(const std::string& name) {
    for (const Preset& p : registry())
        if (p.name == name) return p;
    std::string known;
    for (const Preset& p : registry()) {
        if (!known.empty()) known += ", ";
        known += p.name;
    }
    throw ConfigError("unknown preset \"" + name + "\" (available: " + known + ")");
}

Dataset build_preset_dataset(const Preset& preset) {
    Rng rng(preset.data_seed);
    Dataset ds = preset.kind == Preset::Kind::Gaussian
                     ? synth_gaussian(preset.classes, preset.dim, preset.per_class,
                                      preset.spread, preset.separation, rng)
                     : synth_multilabel(preset.classes, preset.dim, preset.samples,
                                        preset.max_labels, preset.spread, preset.separation,
                                        rng);
    if (preset.query_per_class > 0 || preset.train_per_class > 0)
        ds = make_splits(ds, preset.query_per_class, preset.train_per_class, rng);
    return ds;
}

}  // namespace idcwh
