/* tslint:disable */
/* eslint-disable */

/**
 * B_0..B_jmax for `arcsin`, `monomial:n` or `hyp:a,b,c`.
 */
export function gegenbauer_expansion(_function: string, nu: number, j_max: number): Float64Array;

/**
 * One path of a named kernel on `n` evenly spaced points.
 * Layout: the coordinates, the full path, then each band 0..=j_max.
 */
export function sample_path(kernel: string, j_max: number, n: number, seed: bigint): Float64Array;

/**
 * Windows Psi_0..Psi_{bands-1} on `n` frequencies in [0, 2^bands].
 * Layout: the frequency grid, then one row per band.
 */
export function window_curves(n: number, bands: number, cosine: boolean): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly gegenbauer_expansion: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sample_path: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly window_curves: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
