/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_iqrview_free: (a: number, b: number) => void;
export const __wbg_plantedranking_free: (a: number, b: number) => void;
export const iqr_filter_view: (a: number, b: number, c: number) => [number, number, number];
export const iqrview_iqr: (a: number) => number;
export const iqrview_kept: (a: number) => [number, number];
export const iqrview_q1: (a: number) => number;
export const iqrview_q2: (a: number) => number;
export const iqrview_q3: (a: number) => number;
export const iqrview_threshold: (a: number) => number;
export const lstm_cell_gates: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
export const planted_ranking: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const plantedranking_factors: (a: number) => [number, number];
export const plantedranking_levels: (a: number) => [number, number];
export const plantedranking_recovered: (a: number) => number;
export const plantedranking_scores: (a: number) => [number, number];
export const plantedranking_truth: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_drop_slice: (a: number, b: number) => void;
export const __wbindgen_start: () => void;
