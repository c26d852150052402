/* tslint:disable */
/* eslint-disable */

export class IqrView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * 1 for every input value at or below the threshold.
     */
    kept(): Uint8Array;
    readonly iqr: number;
    readonly q1: number;
    readonly q2: number;
    readonly q3: number;
    readonly threshold: number;
}

export class PlantedRanking {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Factors in ranked order.
     */
    factors(): string[];
    levels(): string[];
    scores(): Float64Array;
    /**
     * Planted `factor=level` pairs, largest effect first.
     */
    truth(): string[];
    readonly recovered: boolean;
}

/**
 * Quartiles of `lengths` and the upper-side cut `Q2 + multiplier · IQR`.
 */
export function iqr_filter_view(lengths: Float64Array, multiplier: number): IqrView;

/**
 * One step of a single-unit, single-input LSTM cell. `w`, `u` and `b` hold
 * the input, forget, candidate and output rows in that order.
 * Returns `[i, f, g, o, c, h]`.
 */
export function lstm_cell_gates(x: number, h_prev: number, c_prev: number, w: Float64Array, u: Float64Array, b: Float64Array): Float64Array;

/**
 * Ranks a freshly planted table; see [`planted_table`].
 */
export function planted_ranking(effects: Float64Array, levels: number, noise: number, seed: bigint): PlantedRanking;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_iqrview_free: (a: number, b: number) => void;
    readonly __wbg_plantedranking_free: (a: number, b: number) => void;
    readonly iqr_filter_view: (a: number, b: number, c: number) => [number, number, number];
    readonly iqrview_iqr: (a: number) => number;
    readonly iqrview_kept: (a: number) => [number, number];
    readonly iqrview_q1: (a: number) => number;
    readonly iqrview_q2: (a: number) => number;
    readonly iqrview_q3: (a: number) => number;
    readonly iqrview_threshold: (a: number) => number;
    readonly lstm_cell_gates: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly planted_ranking: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly plantedranking_factors: (a: number) => [number, number];
    readonly plantedranking_levels: (a: number) => [number, number];
    readonly plantedranking_recovered: (a: number) => number;
    readonly plantedranking_scores: (a: number) => [number, number];
    readonly plantedranking_truth: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
