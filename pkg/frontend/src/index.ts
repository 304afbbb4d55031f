export * from './types';
export * from './api';
export * from './heatmap';
export * from './compare';
export * from './power';
export * from './session';
export * from './csv';
