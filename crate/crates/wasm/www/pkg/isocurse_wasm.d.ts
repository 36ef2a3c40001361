/* tslint:disable */
/* eslint-disable */

/**
 * Fooling function on `D_p^2` vanishing at `n_points` random nodes,
 * evaluated on a `grid x grid` lattice over `[-rad, rad]^2`.
 *
 * Output: `rad, delta`, the `2 n_points` node coordinates, then `grid²`
 * values in row-major order with `y` decreasing. Lattice points outside the
 * body are `NaN`. `delta <= 0` selects the default of the admissible window.
 */
export function fooling_field(p: number, n_points: number, delta: number, grid: number, seed: number): Float64Array;

/**
 * Rows `d, L, rad/(sqrt(d) L), gamma2` for `d = 1..=d_max`, flattened.
 * Pass `p = Infinity` for the cube.
 */
export function geometry_curve(p: number, d_max: number): Float64Array;

/**
 * `n` uniform points of the volume-one body `D_p^2` as `x0, y0, x1, y1, ...`.
 */
export function sample_points_2d(p: number, n: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fooling_field: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly geometry_curve: (a: number, b: number) => [number, number, number, number];
    readonly sample_points_2d: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
