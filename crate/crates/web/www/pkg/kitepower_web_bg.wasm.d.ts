/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_cyclerun_free: (a: number, b: number) => void;
export const check_stability: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const cyclerun_altitude: (a: number) => [number, number];
export const cyclerun_crosswind: (a: number) => [number, number];
export const cyclerun_ok: (a: number) => number;
export const cyclerun_phase: (a: number) => [number, number];
export const cyclerun_summary: (a: number) => [number, number];
export const simulate_cycle: (a: number, b: number, c: number, d: number) => [number, number, number];
export const stability_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
