// Minimal end-to-end use of the library API: synthesize a tiny dataset, train,
// prune, quantise, pack, and run one shift-only inference.

#include <cstdio>

#include "sqnz/pipeline.hpp"

int main() {
  using namespace sqnz;

  ArchConfig arch;
  arch.input_length = 200;
  arch.conv = {{8, 7, true, 5}, {8, 7, true, 5}};
  arch.dense_units = {16, 4};

  const Dataset ds = generate_synthetic_dataset(40, 180, 220, 7);
  auto [inputs, labels] = dataset_to_inputs<float>(ds, arch.input_length);
  SplitSpec spec;
  spec.seed = 7;
  const Split split = stratified_split(ds, spec);

  Hyperparams hp;
  hp.learning_rate = 0.05;
  hp.batch_size = 16;
  hp.max_epochs = 25;
  hp.patience = 25;

  auto tr = train(build_model<float>(arch, 7), select(inputs, split.train),
                  select(labels, split.train), select(inputs, split.val),
                  select(labels, split.val), hp, 7);
  std::printf("baseline val accuracy: %.3f\n", tr.history[tr.best_epoch].val_acc);

  PruneSchedule schedule;
  schedule.fine_tune_hp = hp;
  schedule.fine_tune_hp.max_epochs = 8;
  schedule.fine_tune_hp.patience = 8;
  auto pruned = iterative_prune(std::move(tr.model), schedule, select(inputs, split.train),
                                select(labels, split.train), select(inputs, split.val),
                                select(labels, split.val), 7);
  std::printf("weight sparsity after pruning: %.3f\n", weight_tensor_sparsity(pruned.model));

  QuantConfig q;
  q.bits = 3;
  hp.max_epochs = 10;
  hp.patience = 10;
  auto qat = qat_train(std::move(pruned.model), q, select(inputs, split.train),
                       select(labels, split.train), select(inputs, split.val),
                       select(labels, split.val), hp, 7);

  auto packed_bytes = pack_model_auto(qat.model, q.bits);
  std::printf("packed size: %zu bytes\n", packed_bytes.size());

  const Unpacked unpacked = unpack(packed_bytes);
  std::vector<float> sig(inputs[0].data.begin(), inputs[0].data.end());
  const auto r = quantized_forward(unpacked, sig, 12);
  std::printf("probs: %.3f %.3f %.3f %.3f (skipped %llu of %llu macs)\n", r.probs[0], r.probs[1],
              r.probs[2], r.probs[3], static_cast<unsigned long long>(r.total.skipped),
              static_cast<unsigned long long>(r.total.skipped + r.total.executed));
  return 0;
}
