/**
 * Reader for the simulator's CSV record stream.
 *
 * Schema: seed,step,player,reward,cum_reward,epsilon[,w_model_0,...].
 * The epsilon cell may be empty (scripted agents have no exploration rate)
 * and the trailing weight columns exist only when the run recorded mixture
 * posteriors.
 */

export interface RunRecord {
  seed: number;
  step: number;
  player: string;
  reward: number;
  cumReward: number;
  epsilon: number | null;
  /** Mixture posterior weights, empty when the run did not record them. */
  weights: number[];
}

const REQUIRED = ["seed", "step", "player", "reward", "cum_reward", "epsilon"];

export class SchemaError extends Error {}

/** Split one CSV line. The harness never quotes fields, so a plain split
 * is exact for this schema. */
function splitLine(line: string): string[] {
  return line.split(",");
}

export function parseCsv(text: string): RunRecord[] {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no header row");
  }
  const header = splitLine(lines[0]).map((h) => h.trim());
  for (const col of REQUIRED) {
    if (!header.includes(col)) {
      throw new SchemaError(`missing required column "${col}"`);
    }
  }
  const idx = Object.fromEntries(header.map((h, i) => [h, i]));
  const weightCols = header
    .filter((h) => /^w_model_\d+$/.test(h))
    .sort((a, b) => Number(a.slice(8)) - Number(b.slice(8)));

  const records: RunRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = splitLine(lines[i]);
    const num = (col: string): number => {
      const v = Number(cells[idx[col]]);
      if (!Number.isFinite(v)) {
        throw new SchemaError(`line ${i + 1}: column "${col}" is not numeric`);
      }
      return v;
    };
    const epsCell = cells[idx["epsilon"]];
    records.push({
      seed: num("seed"),
      step: num("step"),
      player: cells[idx["player"]],
      reward: num("reward"),
      cumReward: num("cum_reward"),
      epsilon: epsCell === "" ? null : num("epsilon"),
      weights: weightCols
        .map((c) => cells[idx[c]])
        .filter((v) => v !== "" && v !== undefined)
        .map(Number),
    });
  }
  return records;
}
