/* tslint:disable */
/* eslint-disable */

/**
 * Empirical correlations of the three feature sets on sampled paths.
 */
export function correlation_heatmap(d: number, level: number, paths: number, steps: number, seed: number): string;

/**
 * Itô orthogonal basis over `d` letters, words of length at most `max_degree`.
 */
export function ito_basis_table(max_degree: number, d: number): string;

/**
 * Projects a spatial word off all shorter words in the Fawcett inner product.
 */
export function orthogonalize_word(word: string, d: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly correlation_heatmap: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly ito_basis_table: (a: number, b: number) => [number, number];
    readonly orthogonalize_word: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
