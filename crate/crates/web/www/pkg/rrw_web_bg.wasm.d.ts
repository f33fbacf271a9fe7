/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fieldview_free: (a: number, b: number) => void;
export const field_view: (a: number, b: number, c: number) => [number, number, number];
export const fieldview_grid: (a: number) => number;
export const fieldview_lambda: (a: number) => number;
export const fieldview_length: (a: number) => number;
export const fieldview_modes: (a: number) => number;
export const fieldview_segments: (a: number) => [number, number];
export const fieldview_values: (a: number) => [number, number];
export const kernel_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const zero_density: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
