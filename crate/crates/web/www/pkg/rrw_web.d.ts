/* tslint:disable */
/* eslint-disable */

/**
 * One random wave on the 2-torus, sampled on a square grid, with its nodal line.
 */
export class FieldView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Flattened `[x0, y0, x1, y1, ...]` in unit-square coordinates.
     */
    segments(): Float32Array;
    /**
     * Row-major in `y`, `grid × grid`.
     */
    values(): Float32Array;
    readonly grid: number;
    readonly lambda: number;
    /**
     * Nodal length of the whole torus.
     */
    readonly length: number;
    /**
     * Number of eigenfunctions in the band.
     */
    readonly modes: number;
}

/**
 * Random wave on the 2-torus at `λ = 2π·wavenumber`.
 */
export function field_view(wavenumber: number, seed: number, grid: number): FieldView;

/**
 * `B_d` or `S_d` on `points` equally spaced radii in `[0, r_max]`.
 */
export function kernel_curve(dim: number, monochromatic: boolean, r_max: number, points: number): Float64Array;

/**
 * Zero counts per unit frequency of `draws` random waves on the circle.
 */
export function zero_density(wavenumber: number, draws: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fieldview_free: (a: number, b: number) => void;
    readonly field_view: (a: number, b: number, c: number) => [number, number, number];
    readonly fieldview_grid: (a: number) => number;
    readonly fieldview_lambda: (a: number) => number;
    readonly fieldview_length: (a: number) => number;
    readonly fieldview_modes: (a: number) => number;
    readonly fieldview_segments: (a: number) => [number, number];
    readonly fieldview_values: (a: number) => [number, number];
    readonly kernel_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly zero_density: (a: number, b: number) => [number, number, number, number];
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
