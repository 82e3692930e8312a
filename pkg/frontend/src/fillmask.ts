import {
  Candidate,
  MASK_TOKEN,
  PredictionRequest,
  PredictionResponse,
  Predictor,
  Quiz,
  makeResponse,
} from "./protocol.js";

/**
 * A tiny trainable fill-mask model: bag-of-context features with position
 * offsets, one softmax layer over the answer vocabulary, trained by SGD.
 * Small enough to train in milliseconds, expressive enough to memorize a
 * fixture corpus exactly; it exists so the protocol path can be exercised
 * end to end without a pretrained checkpoint.
 */

const WINDOW = 6; // context tokens kept on each side of the mask

export interface TrainOptions {
  epochs?: number;
  learningRate?: number;
  seed?: number;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function tokenize(text: string): string[] {
  return text
    .split(/([A-Za-z0-9_]+|\[MASK\])/)
    .map((piece) => piece.trim())
    .filter((piece) => piece.length > 0);
}

/** Position-tagged context features for the sentence around its mask. */
export function featuresOf(text: string): string[] {
  const tokens = tokenize(text);
  const maskIndex = tokens.indexOf(MASK_TOKEN);
  if (maskIndex < 0) {
    throw new Error(`text has no ${MASK_TOKEN} slot: ${text}`);
  }
  const features = ["__bias__"];
  for (let i = Math.max(0, maskIndex - WINDOW); i < tokens.length && i <= maskIndex + WINDOW; i++) {
    if (i === maskIndex) continue;
    features.push(`${i - maskIndex}:${tokens[i]}`);
    features.push(`bag:${tokens[i]}`);
  }
  return features;
}

export class FillMaskModel implements Predictor {
  private labels: string[] = [];
  private labelIndex = new Map<string, number>();
  private weights = new Map<string, Float64Array>();

  get vocabulary(): string[] {
    return [...this.labels];
  }

  private row(feature: string): Float64Array {
    let row = this.weights.get(feature);
    if (!row) {
      row = new Float64Array(this.labels.length);
      this.weights.set(feature, row);
    }
    return row;
  }

  private logits(features: string[]): Float64Array {
    const out = new Float64Array(this.labels.length);
    for (const feature of features) {
      const row = this.weights.get(feature);
      if (!row) continue;
      for (let c = 0; c < out.length; c++) out[c] += row[c];
    }
    return out;
  }

  train(examples: Array<{ text: string; answer: string }>, options: TrainOptions = {}): void {
    const { epochs = 80, learningRate = 0.5, seed = 7 } = options;
    this.labels = [...new Set(examples.map((e) => e.answer))].sort();
    this.labelIndex = new Map(this.labels.map((label, i) => [label, i]));
    this.weights = new Map();

    const rows = examples.map((e) => ({
      features: featuresOf(e.text),
      target: this.labelIndex.get(e.answer)!,
    }));
    const rand = mulberry32(seed);
    const order = rows.map((_, i) => i);

    for (let epoch = 0; epoch < epochs; epoch++) {
      for (let i = order.length - 1; i > 0; i--) {
        const j = Math.floor(rand() * (i + 1));
        [order[i], order[j]] = [order[j], order[i]];
      }
      for (const index of order) {
        const { features, target } = rows[index];
        const logits = this.logits(features);
        let max = -Infinity;
        for (const v of logits) max = Math.max(max, v);
        let total = 0;
        const probs = new Float64Array(logits.length);
        for (let c = 0; c < logits.length; c++) {
          probs[c] = Math.exp(logits[c] - max);
          total += probs[c];
        }
        for (let c = 0; c < probs.length; c++) probs[c] /= total;
        for (const feature of features) {
          const row = this.row(feature);
          for (let c = 0; c < row.length; c++) {
            const gradient = (c === target ? 1 : 0) - probs[c];
            row[c] += learningRate * gradient;
          }
        }
      }
    }
  }

  topK(text: string, k: number): Candidate[] {
    const logits = this.logits(featuresOf(text));
    return this.labels.map((t, c) => ({ t, s: logits[c] })).slice(0, this.labels.length)
      .sort((a, b) => b.s - a.s || (a.t < b.t ? -1 : 1))
      .slice(0, k);
  }

  predict(request: PredictionRequest): PredictionResponse {
    return makeResponse(request.quiz_id, this.topK(request.text, request.k), request.k);
  }
}

export function trainOnQuizzes(quizzes: Quiz[], options: TrainOptions = {}): FillMaskModel {
  const model = new FillMaskModel();
  model.train(
    quizzes.map((q) => ({ text: q.template, answer: q.answer })),
    options
  );
  return model;
}
