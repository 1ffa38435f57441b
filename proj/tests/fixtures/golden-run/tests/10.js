let mocha = require('mocha');
let assert = require('assert');
let mini_pkg = require('mini-pkg');
// usage #1
// const pkg = require('mini-pkg');
// const colors = { red: '#f00' };
// console.log(pkg.lookup(colors, 'red')); // '#f00'
// usage #2
// const colors = { blue: '#00f' };
// console.log(pkg.lookup(colors, 'green')); // undefined
// usage #3
// pkg.lookup({}, 'missing');
// function lookup(table, key) {
//   if (Object.prototype.hasOwnProperty.call(table || EMPTY, key)) {
//     return table[key];
//   }
//   return undefined;
// }
// mini-pkg.lookup(table, key)
describe('test mini_pkg', function() {
    it('test mini-pkg.lookup', function(done) {
        mini_pkg.lookup({}, 'x');
        assert.ok(true);
        done();
    });
});